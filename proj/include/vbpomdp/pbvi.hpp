#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbpomdp/condense.hpp"
#include "vbpomdp/filter.hpp"
#include "vbpomdp/model.hpp"
#include "vbpomdp/parallel.hpp"
#include "vbpomdp/rng.hpp"
#include "vbpomdp/vb.hpp"

namespace vbpomdp {

struct SolveOptions {
  CondenseConfig alpha_condense{.target_size = 60, .cluster_count = 4};
  double vb_tol = 1e-6;
  int vb_max_iter = 100;
  int threads = 0;  // 0 = effective_threads()
};

/// Belief-independent intermediate alpha functions for one backup round,
/// keyed by (policy alpha index, action index, observation label index).
struct IntermediateTable {
  int alpha_count = 0;
  std::vector<std::string> actions;
  std::vector<std::string> labels;
  std::vector<GaussianMixture> entries;  // flattened, (i * |A| + a) * |L| + l

  const GaussianMixture& at(int alpha, int action, int label) const {
    return entries[(static_cast<std::size_t>(alpha) * actions.size() + action) * labels.size() + label];
  }
};

namespace detail {

inline CondenseConfig reseeded(CondenseConfig cfg, std::uint64_t salt) {
  SplitRng rng = SplitRng::keyed(cfg.seed, salt);
  cfg.seed = rng.next_u64();
  return cfg;
}

/// One (alpha, action, label) entry: observation product, transition
/// pullback, optional state transform, condensation.
inline GaussianMixture intermediate_entry(const GaussianMixture& alpha, const CPOMDPModel& model,
                                          const ActionModel& action, const std::string& label,
                                          const CondenseConfig& condense_cfg, double vb_tol, int vb_max_iter) {
  std::vector<GaussianComponent> raw;
  if (model.softmax_mode()) {
    const GaussianMixture prod = vb_mixture_product(alpha, model.softmax(), label, vb_tol, vb_max_iter);
    raw = prod.components();
  } else {
    const GaussianMixture& lk = model.gm_observation().at(label);
    raw.reserve(alpha.components().size() * lk.components().size());
    for (const auto& ac : alpha.components())
      for (const auto& lc : lk.components()) raw.push_back(gaussian_product(ac, lc));
  }

  std::vector<GaussianComponent> mapped;
  mapped.reserve(raw.size());
  for (const auto& c : raw) {
    if (c.weight() == 0.0) continue;  // VB mass underflow on a far-away mixand
    MatrixXd cov = c.covariance() + action.noise;
    GaussianComponent pulled(c.weight(), c.mean() - action.delta, 0.5 * (cov + cov.transpose()));
    mapped.push_back(model.stm() ? lti_transform(pulled, *model.stm()) : pulled);
  }
  GaussianMixture entry(model.dimension(), MixtureKind::reward_or_alpha, std::move(mapped));
  return cluster_condense(entry, condense_cfg);
}

inline bool alphas_equal(const AlphaFunction& a, const AlphaFunction& b, double tol = 1e-9) {
  if (a.action != b.action || a.gm.size() != b.gm.size()) return false;
  for (int i = 0; i < a.gm.size(); ++i) {
    const auto& ca = a.gm.components()[i];
    const auto& cb = b.gm.components()[i];
    if (std::abs(ca.weight() - cb.weight()) > tol) return false;
    if ((ca.mean() - cb.mean()).cwiseAbs().maxCoeff() > tol) return false;
    if ((ca.covariance() - cb.covariance()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace detail

/// Computes every (alpha, action, label) intermediate once per round; they
/// do not depend on the belief being backed up. Entries are independent and
/// evaluated in parallel with per-entry condensation seeds, so the table is
/// identical for any thread count.
inline IntermediateTable intermediate_alphas(const PolicySet& policy, const CPOMDPModel& model,
                                             const CondenseConfig& condense_cfg, double vb_tol = 1e-6,
                                             int vb_max_iter = 100, int threads = 0) {
  if (policy.alphas.empty()) throw std::invalid_argument("intermediate_alphas: empty policy");
  IntermediateTable table;
  table.alpha_count = static_cast<int>(policy.alphas.size());
  for (const auto& a : model.actions()) table.actions.push_back(a.name);
  table.labels = model.labels();

  const int total = table.alpha_count * static_cast<int>(table.actions.size() * table.labels.size());
  std::vector<std::optional<GaussianMixture>> slots(total);
  parallel_for(total, effective_threads(threads), [&](int idx) {
    const int l = idx % static_cast<int>(table.labels.size());
    const int rest = idx / static_cast<int>(table.labels.size());
    const int a = rest % static_cast<int>(table.actions.size());
    const int i = rest / static_cast<int>(table.actions.size());
    slots[idx] = detail::intermediate_entry(policy.alphas[i].gm, model, model.actions()[a], table.labels[l],
                                            detail::reseeded(condense_cfg, static_cast<std::uint64_t>(idx)), vb_tol,
                                            vb_max_iter);
  });
  table.entries.reserve(total);
  for (auto& s : slots) table.entries.push_back(std::move(*s));
  return table;
}

/// One point-based Bellman backup: per action, the best intermediate per
/// label (by inner product with the belief) is summed, discounted and added
/// to the action's reward; the best-scoring candidate is returned tagged
/// with its action. With a zero discount the reward of the best action is
/// returned unchanged.
inline AlphaFunction backup(const GaussianMixture& belief, const IntermediateTable& table, const CPOMDPModel& model) {
  if (belief.kind() != MixtureKind::belief) throw std::invalid_argument("backup: input must be a belief");
  if (table.entries.empty()) throw std::invalid_argument("backup: empty intermediate table");
  const double gamma = model.discount();

  double best_value = -std::numeric_limits<double>::infinity();
  int best_action = -1;
  std::vector<int> best_choice;

  for (int a = 0; a < static_cast<int>(table.actions.size()); ++a) {
    double value = inner_product(model.reward(table.actions[a]), belief);
    std::vector<int> choice(table.labels.size(), 0);
    if (gamma > 0.0) {
      for (int l = 0; l < static_cast<int>(table.labels.size()); ++l) {
        double label_best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < table.alpha_count; ++i) {
          const double v = inner_product(table.at(i, a, l), belief);
          if (v > label_best) {
            label_best = v;
            choice[l] = i;
          }
        }
        value += gamma * label_best;
      }
    }
    if (value > best_value) {
      best_value = value;
      best_action = a;
      best_choice = choice;
    }
  }

  std::vector<GaussianComponent> comps = model.reward(table.actions[best_action]).components();
  if (gamma > 0.0) {
    for (int l = 0; l < static_cast<int>(table.labels.size()); ++l) {
      const GaussianMixture& chosen = table.at(best_choice[l], best_action, l);
      for (const auto& c : chosen.components()) comps.push_back(c.scaled(gamma));
    }
  }
  return {GaussianMixture(model.dimension(), MixtureKind::reward_or_alpha, std::move(comps)),
          table.actions[best_action]};
}

struct RoundLog {
  int round = 0;
  int alpha_count = 0;
  double mean_value = 0.0;
  double millis = 0.0;
};

struct SolveResult {
  PolicySet policy;
  std::vector<RoundLog> log;
};

/// Highest value any alpha assigns to the belief, with the winning action.
/// Ties break to the lowest alpha index.
inline std::pair<std::string, double> policy_query(const PolicySet& policy, const GaussianMixture& belief) {
  if (policy.alphas.empty()) throw std::invalid_argument("policy_query: empty policy");
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < policy.alphas.size(); ++i) {
    const double v = inner_product(policy.alphas[i].gm, belief);
    if (v > best_value) {
      best_value = v;
      best = static_cast<int>(i);
    }
  }
  return {policy.alphas[best].action, best_value};
}

/// Point-based value iteration. Gamma_0 holds one alpha per action seeded
/// with that action's reward; each round recomputes the intermediate table
/// once, backs up every training belief, condenses and deduplicates the
/// results.
inline SolveResult solve(const CPOMDPModel& model, const std::vector<GaussianMixture>& beliefs, int rounds,
                         const SolveOptions& options) {
  if (rounds < 1) throw std::invalid_argument("solve: rounds must be >= 1");
  if (beliefs.empty()) throw std::invalid_argument("solve: no training beliefs");
  for (const auto& b : beliefs)
    if (b.kind() != MixtureKind::belief) throw std::invalid_argument("solve: training set must contain beliefs");
  options.alpha_condense.validate();

  SolveResult result;
  PolicySet gamma;
  gamma.horizon = 0;
  for (const auto& a : model.actions()) gamma.alphas.push_back({model.reward(a.name), a.name});

  const int threads = effective_threads(options.threads);
  for (int round = 1; round <= rounds; ++round) {
    const auto t0 = std::chrono::steady_clock::now();
    const IntermediateTable table =
        intermediate_alphas(gamma, model, detail::reseeded(options.alpha_condense, 0x726f756e64ull + round),
                            options.vb_tol, options.vb_max_iter, threads);

    std::vector<std::optional<AlphaFunction>> backed(beliefs.size());
    parallel_for(static_cast<int>(beliefs.size()), threads, [&](int bi) {
      AlphaFunction alpha = backup(beliefs[bi], table, model);
      const auto cfg = detail::reseeded(options.alpha_condense,
                                        (static_cast<std::uint64_t>(round) << 32) ^ static_cast<std::uint64_t>(bi));
      backed[bi] = AlphaFunction{cluster_condense(alpha.gm, cfg), alpha.action};
    });

    PolicySet next;
    next.horizon = round;
    for (auto& candidate : backed) {
      bool duplicate = false;
      for (const auto& kept : next.alphas)
        if (detail::alphas_equal(kept, *candidate)) {
          duplicate = true;
          break;
        }
      if (!duplicate) next.alphas.push_back(std::move(*candidate));
    }
    gamma = std::move(next);

    double mean_value = 0.0;
    for (const auto& b : beliefs) mean_value += policy_query(gamma, b).second;
    mean_value /= static_cast<double>(beliefs.size());
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back({round, static_cast<int>(gamma.alphas.size()), mean_value, ms});
  }
  result.policy = std::move(gamma);
  return result;
}

/// Training beliefs sampled from the reachable belief space: random actions
/// and sampled observations pushed through the filter for a uniform random
/// depth in [0, max_depth]. A zero-mass update falls back to the prediction.
/// Axes listed in self_observe_axes are conditioned on the sampled state
/// each step, mirroring an agent that measures those coordinates directly.
inline std::vector<GaussianMixture> generate_beliefs(const CPOMDPModel& model, const GaussianMixture& initial,
                                                     int count, int max_depth, std::uint64_t seed,
                                                     const FilterConfig& filter_cfg = {},
                                                     const std::vector<int>& self_observe_axes = {}) {
  if (count < 1) throw std::invalid_argument("generate_beliefs: count must be >= 1");
  if (initial.kind() != MixtureKind::belief) throw std::invalid_argument("generate_beliefs: initial must be a belief");
  const auto labels = model.labels();
  std::vector<GaussianMixture> out;
  out.reserve(count);
  for (int idx = 0; idx < count; ++idx) {
    SplitRng rng = SplitRng::keyed(seed, static_cast<std::uint64_t>(idx));
    const int depth = max_depth > 0 ? static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_depth + 1)) : 0;
    GaussianMixture belief = initial;
    for (int t = 0; t < depth; ++t) {
      const auto& action = model.actions()[rng.next_u64() % model.actions().size()];
      const GaussianMixture predicted = predict(belief, model, action.name);

      std::vector<double> weights;
      weights.reserve(predicted.components().size());
      for (const auto& c : predicted.components()) weights.push_back(c.weight());
      const auto& comp = predicted.components()[rng.categorical(weights)];
      Eigen::LLT<MatrixXd> llt(comp.covariance());
      VectorXd z(model.dimension());
      for (int i = 0; i < model.dimension(); ++i) z[i] = rng.normal();
      const VectorXd state = comp.mean() + MatrixXd(llt.matrixL()) * z;

      const auto probs = model.label_probabilities(state);
      const std::string& label = labels[rng.categorical(probs)];
      try {
        belief = update(predicted, model, label, filter_cfg);
      } catch (const zero_mass_error&) {
        belief = cluster_condense(predicted, filter_cfg.condense);
      }
      for (int axis : self_observe_axes) {
        try {
          belief = condition_on_axis(belief, axis, state[axis]);
        } catch (const zero_mass_error&) {
        }
      }
    }
    out.push_back(std::move(belief));
  }
  return out;
}

}  // namespace vbpomdp
