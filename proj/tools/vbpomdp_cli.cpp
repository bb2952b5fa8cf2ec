// Command-line front end: offline policy solving, Monte-Carlo simulation,
// condensation benchmarking and variational-bound verification. Logs go to
// stderr; data goes to files under --out.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "vbpomdp/vbpomdp.hpp"

namespace fs = std::filesystem;
using namespace vbpomdp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  return out;
}

struct SolveArgs {
  std::string scenario;
  std::string obs_mode = "softmax";
  int rounds = 30;
  int beliefs = 20;
  int max_depth = 15;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int alpha_target = 60;
  int belief_target = 20;
  int clusters = 4;
  std::string metric = "euclidean";
  double vb_tol = 1e-6;
  int vb_max_iter = 100;
  int threads = 0;
};

int cmd_solve(const SolveArgs& args) {
  const Scenario scenario = load_scenario(args.scenario);
  const CPOMDPModel* model = &scenario.model;
  if (args.obs_mode == "gm") {
    if (!scenario.gm_model) throw std::invalid_argument("scenario has no GM-likelihood model: " + args.scenario);
    model = &*scenario.gm_model;
  } else if (args.obs_mode != "softmax") {
    throw std::invalid_argument("unknown observation mode: " + args.obs_mode);
  }

  FilterConfig filter_cfg;
  filter_cfg.condense.target_size = args.belief_target;
  filter_cfg.condense.cluster_count = args.clusters;
  filter_cfg.condense.metric = distance_metric_from_string(args.metric);
  filter_cfg.condense.seed = args.seed;

  SolveOptions options;
  options.alpha_condense.target_size = args.alpha_target;
  options.alpha_condense.cluster_count = args.clusters;
  options.alpha_condense.metric = filter_cfg.condense.metric;
  options.alpha_condense.seed = args.seed;
  options.vb_tol = args.vb_tol;
  options.vb_max_iter = args.vb_max_iter;
  options.threads = args.threads;

  std::cerr << "solve: scenario=" << args.scenario << " obs=" << args.obs_mode << " rounds=" << args.rounds
            << " beliefs=" << args.beliefs << " seed=" << args.seed << "\n";
  const auto beliefs = generate_beliefs(*model, scenario.initial_belief, args.beliefs, args.max_depth, args.seed,
                                        filter_cfg, scenario.self_observe_axes);
  const SolveResult result = solve(*model, beliefs, args.rounds, options);

  fs::create_directories(args.out_dir);
  write_json_file((fs::path(args.out_dir) / "policy.json").string(), result.policy);
  auto log = open_output(fs::path(args.out_dir) / "solve_log.csv");
  log << "round,alphaCount,meanValue,millis\n";
  for (const auto& row : result.log)
    log << row.round << "," << row.alpha_count << "," << fmt(row.mean_value) << "," << fmt(row.millis) << "\n";
  std::cerr << "solve: wrote policy.json with " << result.policy.alphas.size() << " alphas\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string scenario;
  std::string policy_file;
  std::string gm_policy_file;
  std::string baselines;
  int episodes = 100;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int belief_target = 20;
  int clusters = 4;
  int threads = 0;
};

int cmd_simulate(const SimulateArgs& args) {
  const Scenario scenario = load_scenario(args.scenario);
  FilterConfig filter_cfg;
  filter_cfg.condense.target_size = args.belief_target;
  filter_cfg.condense.cluster_count = args.clusters;
  filter_cfg.condense.seed = args.seed;

  std::vector<std::pair<PolicyKind, PolicySet>> runs;
  if (!args.policy_file.empty())
    runs.emplace_back(PolicyKind::vb, policy_from_json(load_json_file(args.policy_file)));
  if (!args.gm_policy_file.empty())
    runs.emplace_back(PolicyKind::gm_likelihood, policy_from_json(load_json_file(args.gm_policy_file)));
  if (!args.baselines.empty()) {
    std::stringstream ss(args.baselines);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const PolicyKind kind = policy_kind_from_string(item);
      if (kind != PolicyKind::greedy && kind != PolicyKind::perfect)
        throw std::invalid_argument("--baselines accepts greedy and perfect only");
      runs.emplace_back(kind, PolicySet{});
    }
  }
  if (runs.empty()) throw std::invalid_argument("nothing to simulate: give --policy, --gm-policy or --baselines");

  fs::create_directories(args.out_dir);
  auto csv = open_output(fs::path(args.out_dir) / "batch.csv");
  csv << "scenario,policy,episode,seed,totalReward,caught,stepsToCatch\n";

  json summary;
  summary["scenario"] = scenario.name;
  summary["episodes"] = args.episodes;
  summary["seed"] = args.seed;
  std::vector<std::pair<std::string, std::vector<double>>> rewards;
  for (const auto& [kind, policy] : runs) {
    std::cerr << "simulate: " << to_string(kind) << " x" << args.episodes << "\n";
    const RunBatchResult batch =
        run_batch(scenario, kind, &policy, args.episodes, filter_cfg, args.seed, args.threads);
    std::vector<double> kind_rewards;
    kind_rewards.reserve(batch.episodes.size());
    for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
      const auto& ep = batch.episodes[e];
      csv << scenario.name << "," << to_string(kind) << "," << e << "," << args.seed << "," << fmt(ep.total_reward)
          << "," << (ep.caught ? 1 : 0) << "," << (ep.steps_to_catch ? std::to_string(*ep.steps_to_catch) : "")
          << "\n";
      kind_rewards.push_back(ep.total_reward);
    }
    json s{{"meanReward", batch.summary.mean_reward},
           {"stddevReward", batch.summary.stddev_reward},
           {"capturePct", batch.summary.capture_pct}};
    if (!std::isnan(batch.summary.mean_steps_to_catch)) s["meanStepsToCatch"] = batch.summary.mean_steps_to_catch;
    summary["policies"][to_string(kind)] = s;
    rewards.emplace_back(to_string(kind), std::move(kind_rewards));
  }

  if (args.episodes >= 2) {
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      for (std::size_t j = i + 1; j < rewards.size(); ++j) {
        const auto r = welch_ttest(rewards[i].second, rewards[j].second);
        summary["welch"][rewards[i].first + "_vs_" + rewards[j].first] = {{"t", r.t}, {"p", r.p}, {"df", r.df}};
      }
    }
  }
  auto out = open_output(fs::path(args.out_dir) / "summary.json");
  out << summary.dump(2) << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::vector<int> dims{1, 2, 4};
  std::vector<int> sizes{400};
  std::vector<int> targets{20};
  int clusters = 4;
  int repeats = 10;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

int cmd_condense_bench(const BenchArgs& args) {
  fs::create_directories(args.out_dir);
  auto csv = open_output(fs::path(args.out_dir) / "condense_bench.csv");
  csv << "dimension,M,Mtilde,K,metric,nisd,millis,seed\n";
  const std::vector<DistanceMetric> metrics{DistanceMetric::sym_kl, DistanceMetric::jsd, DistanceMetric::euclidean,
                                            DistanceMetric::wasserstein2, DistanceMetric::bhattacharyya};
  for (int dim : args.dims) {
    for (int m : args.sizes) {
      for (int target : args.targets) {
        for (int rep = 0; rep < args.repeats; ++rep) {
          const std::uint64_t seed = args.seed + 1000ull * rep;
          const auto mix = random_mixture(MixtureGenSpec::uniform_box(dim, m, 0.0, 10.0, dim, 2.0, 0.0, 1.0,
                                                                      seed ^ (0x9e37ull * dim) ^ (0x79b9ull * m)));
          const auto runnalls_t0 = std::chrono::steady_clock::now();
          const auto full = runnalls(mix, target);
          const double runnalls_ms =
              std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - runnalls_t0).count();
          csv << dim << "," << m << "," << target << "," << args.clusters << ",runnalls,"
              << fmt(mixture_nisd(mix, full)) << "," << fmt(runnalls_ms) << "," << seed << "\n";

          for (const auto metric : metrics) {
            CondenseConfig cfg;
            cfg.target_size = target;
            cfg.cluster_count = args.clusters;
            cfg.metric = metric;
            cfg.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            const auto hybrid = cluster_condense(mix, cfg);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            csv << dim << "," << m << "," << target << "," << args.clusters << "," << to_string(metric) << ","
                << fmt(mixture_nisd(mix, hybrid)) << "," << fmt(ms) << "," << seed << "\n";
          }
        }
      }
    }
  }
  std::cerr << "condense-bench: wrote condense_bench.csv\n";
  return kExitOk;
}

struct VbCheckArgs {
  int cases = 200;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  double tol = 1e-6;
  int max_iter = 100;
};

int cmd_vb_check(const VbCheckArgs& args) {
  fs::create_directories(args.out_dir);
  auto csv = open_output(fs::path(args.out_dir) / "vb_check.csv");
  csv << "case,C_quadrature,C_hat,gap,iterations\n";
  int violations = 0;
  for (int k = 0; k < args.cases; ++k) {
    SplitRng rng = SplitRng::keyed(args.seed, static_cast<std::uint64_t>(k));
    const int dim = (k % 2) + 1;
    const int n_classes = 2 + k % 3;
    std::vector<SoftmaxClass> classes(n_classes);
    std::map<std::string, std::vector<int>> labels;
    for (int c = 0; c < n_classes; ++c) {
      VectorXd w(dim);
      for (int i = 0; i < dim; ++i) w[i] = rng.uniform(-2.0, 2.0);
      classes[c] = {std::move(w), rng.uniform(-1.0, 1.0)};
      labels["label" + std::to_string(c)] = {c};
    }
    const SoftmaxModel model(dim, std::move(classes), std::move(labels));
    VectorXd mean(dim);
    for (int i = 0; i < dim; ++i) mean[i] = rng.uniform(-2.0, 2.0);
    MatrixXd a(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) a(r, c) = rng.normal();
    MatrixXd cov = a * a.transpose() + 0.2 * MatrixXd::Identity(dim, dim);
    const GaussianComponent prior(1.0, mean, 0.5 * (cov + cov.transpose()));
    const int j = k % n_classes;

    const VBResult r = vb_gaussian_product(prior, model, j, args.tol, args.max_iter);
    const GaussianMixture prior_mix(dim, MixtureKind::belief, {prior});
    const double c_quad = quadrature::integrate_over_support(
        prior_mix, [&](const VectorXd& s) { return prior.evaluate(s) * model.class_prob(s, j); });
    const double c_hat = std::exp(r.log_mass);
    if (c_hat > c_quad + 1e-9) ++violations;
    csv << k << "," << fmt(c_quad) << "," << fmt(c_hat) << "," << fmt(c_quad - c_hat) << "," << r.iterations << "\n";
  }
  std::cerr << "vb-check: " << args.cases << " cases, " << violations << " bound violations\n";
  return violations == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-mixture CPOMDP planning with variational-Bayes softmax observations"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a policy offline with point-based value iteration");
  solve_cmd->add_option("--scenario", solve_args.scenario, "Built-in scenario name or scenario JSON path")->required();
  solve_cmd->add_option("--obs-mode", solve_args.obs_mode, "Observation model to plan with: softmax or gm");
  solve_cmd->add_option("--rounds", solve_args.rounds, "Backup rounds");
  solve_cmd->add_option("--beliefs", solve_args.beliefs, "Training belief count");
  solve_cmd->add_option("--max-depth", solve_args.max_depth, "Belief generation rollout depth");
  solve_cmd->add_option("--seed", solve_args.seed, "RNG seed");
  solve_cmd->add_option("--out", solve_args.out_dir, "Output directory");
  solve_cmd->add_option("--alpha-target", solve_args.alpha_target, "Alpha condensation target size");
  solve_cmd->add_option("--belief-target", solve_args.belief_target, "Belief condensation target size");
  solve_cmd->add_option("--clusters", solve_args.clusters, "Condensation cluster count");
  solve_cmd->add_option("--metric", solve_args.metric, "Clustering metric");
  solve_cmd->add_option("--vb-tol", solve_args.vb_tol, "VB convergence tolerance on log mass");
  solve_cmd->add_option("--vb-max-iter", solve_args.vb_max_iter, "VB iteration cap");
  solve_cmd->add_option("--threads", solve_args.threads, "Worker threads (0 = auto)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Run Monte-Carlo episodes for policies and baselines");
  sim_cmd->add_option("--scenario", sim_args.scenario, "Built-in scenario name or scenario JSON path")->required();
  sim_cmd->add_option("--policy", sim_args.policy_file, "Policy JSON for the softmax planner");
  sim_cmd->add_option("--gm-policy", sim_args.gm_policy_file, "Policy JSON for the GM-likelihood planner");
  sim_cmd->add_option("--baselines", sim_args.baselines, "Comma list of greedy,perfect");
  sim_cmd->add_option("--episodes", sim_args.episodes, "Episode count");
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed");
  sim_cmd->add_option("--out", sim_args.out_dir, "Output directory");
  sim_cmd->add_option("--belief-target", sim_args.belief_target, "Belief condensation target size");
  sim_cmd->add_option("--clusters", sim_args.clusters, "Condensation cluster count");
  sim_cmd->add_option("--threads", sim_args.threads, "Worker threads (0 = auto)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("condense-bench", "Benchmark hybrid condensation against plain Runnalls");
  bench_cmd->add_option("--dims", bench_args.dims, "Dimensions to sweep");
  bench_cmd->add_option("--sizes", bench_args.sizes, "Starting mixture sizes");
  bench_cmd->add_option("--targets", bench_args.targets, "Condensation targets");
  bench_cmd->add_option("--clusters", bench_args.clusters, "Cluster count");
  bench_cmd->add_option("--repeats", bench_args.repeats, "Repetitions per cell");
  bench_cmd->add_option("--seed", bench_args.seed, "RNG seed");
  bench_cmd->add_option("--out", bench_args.out_dir, "Output directory");

  VbCheckArgs vb_args;
  auto* vb_cmd = app.add_subcommand("vb-check", "Verify the variational lower bound against quadrature");
  vb_cmd->add_option("--cases", vb_args.cases, "Probe count");
  vb_cmd->add_option("--seed", vb_args.seed, "RNG seed");
  vb_cmd->add_option("--out", vb_args.out_dir, "Output directory");
  vb_cmd->add_option("--vb-tol", vb_args.tol, "VB convergence tolerance");
  vb_cmd->add_option("--vb-max-iter", vb_args.max_iter, "VB iteration cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_args);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (bench_cmd->parsed()) return cmd_condense_bench(bench_args);
    if (vb_cmd->parsed()) return cmd_vb_check(vb_args);
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
