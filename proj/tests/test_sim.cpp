#include <catch_amalgamated.hpp>

#include "vbpomdp/scenarios.hpp"
#include "vbpomdp/sim.hpp"

using namespace vbpomdp;
using Catch::Approx;

namespace {

Scenario noiseless_colinear() {
  Scenario s = scenarios::colinear();
  s.robber_walk_var = 0.0;
  for (auto& [name, a] : s.cop_actions) a.noise_var = 0.0;
  return s;
}

}  // namespace

TEST_CASE("env_step dynamics and rewards", "[sim]") {
  SECTION("zero process noise and stay leave the truth unchanged") {
    const auto s = noiseless_colinear();
    SplitRng rng(1);
    const VectorXd truth = (VectorXd(2) << 2.0, 3.0).finished();
    const auto out = env_step(s, truth, "stay", rng);
    REQUIRE(out.next_truth == truth);
  }
  SECTION("colinear reward thresholds") {
    const auto s = noiseless_colinear();
    SplitRng rng(2);
    REQUIRE(env_step(s, (VectorXd(2) << 2.5, 2.8).finished(), "stay", rng).reward == Approx(3.0));
    REQUIRE(env_step(s, (VectorXd(2) << 2.5, 3.3).finished(), "stay", rng).reward == Approx(-1.0));
  }
  SECTION("truth clamps to the scenario bounds") {
    const auto s = noiseless_colinear();
    SplitRng rng(3);
    const auto out = env_step(s, (VectorXd(2) << 0.2, 2.0).finished(), "left", rng);
    REQUIRE(out.next_truth[0] == Approx(0.0));
  }
  SECTION("NCV truth integrates velocity into position") {
    Scenario s = scenarios::ncv4d();
    s.ncv_accel_var = 1e-18;
    for (auto& [name, a] : s.cop_actions) a.noise_var = 0.0;
    SplitRng rng(4);
    VectorXd truth(6);
    truth << 0, 0, 1, 0, 0.5, -0.25;  // cop, rob, robvel
    const auto out = env_step(s, truth, "Stay", rng);
    REQUIRE(out.next_truth[2] == Approx(1.5).margin(1e-6));
    REQUIRE(out.next_truth[3] == Approx(-0.25).margin(1e-6));
  }
  SECTION("label sampling frequencies match the model probabilities") {
    const auto s = noiseless_colinear();
    const VectorXd truth = (VectorXd(2) << 2.5, 3.2).finished();
    const auto labels = s.model.labels();
    const auto probs = s.model.label_probabilities(s.model_state(truth));  // stay keeps the state
    std::map<std::string, int> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      SplitRng rng = SplitRng::keyed(999, i);
      counts[env_step(s, truth, "stay", rng).label] += 1;
    }
    for (std::size_t l = 0; l < labels.size(); ++l) {
      const double expect = probs[l] * n;
      const double sigma = std::sqrt(probs[l] * (1.0 - probs[l]) * n);
      REQUIRE(std::abs(counts[labels[l]] - expect) <= 3.0 * sigma);
    }
  }
}

TEST_CASE("baseline actions", "[sim]") {
  const auto s = scenarios::search2d();
  SECTION("perfect moves toward the true robber") {
    VectorXd truth(4);
    truth << 0, 0, 3, 0;  // robber due east
    REQUIRE(baseline_action(BaselineKind::perfect, s, s.initial_belief, truth) == "East");
    truth << 0, 0, 0, -4;
    REQUIRE(baseline_action(BaselineKind::perfect, s, s.initial_belief, truth) == "South");
  }
  SECTION("greedy chases the belief, ignoring the truth") {
    GaussianMixture belief(2, MixtureKind::belief,
                           {GaussianComponent(1.0, (VectorXd(2) << 2.5, 0).finished(), MatrixXd::Identity(2, 2))});
    VectorXd truth(4);
    truth << 0, 0, -5, 0;  // truth contradicts the belief; greedy must not see it
    REQUIRE(baseline_action(BaselineKind::greedy, s, belief, truth) == "East");
  }
  SECTION("greedy is invariant to positive reward scaling") {
    Scenario scaled = s;
    std::map<std::string, GaussianMixture> rewards;
    for (const auto& a : s.model.actions()) rewards.emplace(a.name, s.model.reward(a.name).scaled(7.5));
    scaled.model = CPOMDPModel(2, s.model.actions(), std::nullopt, rewards, s.model.observation(),
                               s.model.discount());
    GaussianMixture belief(2, MixtureKind::belief,
                           {GaussianComponent(1.0, (VectorXd(2) << -1.8, 0.3).finished(), MatrixXd::Identity(2, 2))});
    VectorXd truth = VectorXd::Zero(4);
    REQUIRE(baseline_action(BaselineKind::greedy, s, belief, truth) ==
            baseline_action(BaselineKind::greedy, scaled, belief, truth));
  }
}

TEST_CASE("run_batch", "[sim]") {
  const auto s = noiseless_colinear();
  FilterConfig cfg;
  cfg.condense.target_size = 8;
  SECTION("zero episodes is error-free and empty") {
    const auto out = run_batch(s, PolicyKind::greedy, nullptr, 0, cfg, 1);
    REQUIRE(out.episodes.empty());
    REQUIRE(out.summary.episodes == 0);
  }
  SECTION("missing policy rejected") {
    REQUIRE_THROWS_AS(run_batch(s, PolicyKind::vb, nullptr, 2, cfg, 1), std::invalid_argument);
  }
  SECTION("same seed reproduces summaries; thread count does not matter") {
    Scenario sc = scenarios::colinear();
    sc.episode_steps = 15;
    const auto a = run_batch(sc, PolicyKind::greedy, nullptr, 6, cfg, 33, 1);
    const auto b = run_batch(sc, PolicyKind::greedy, nullptr, 6, cfg, 33, 3);
    REQUIRE(a.summary.mean_reward == b.summary.mean_reward);
    REQUIRE(a.summary.stddev_reward == b.summary.stddev_reward);
    for (std::size_t e = 0; e < a.episodes.size(); ++e)
      REQUIRE(a.episodes[e].total_reward == b.episodes[e].total_reward);
  }
  SECTION("reward accounting sums the per-step rewards exactly") {
    Scenario sc = scenarios::colinear();
    sc.episode_steps = 12;
    const auto out = run_batch(sc, PolicyKind::perfect, nullptr, 3, cfg, 5, 1, true);
    for (const auto& ep : out.episodes) {
      REQUIRE(ep.steps == 12);
      double total = 0.0;
      for (const auto& step : ep.trajectory) total += step.reward;
      REQUIRE(total == ep.total_reward);
    }
  }
  SECTION("capture scenarios stop at the first catch and record it") {
    Scenario sc = scenarios::search2d_mms();
    sc.episode_steps = 60;
    const auto out = run_batch(sc, PolicyKind::perfect, nullptr, 8, cfg, 11, 1);
    int caught = 0;
    for (const auto& ep : out.episodes) {
      if (ep.caught) {
        ++caught;
        REQUIRE(ep.steps_to_catch.has_value());
        REQUIRE(*ep.steps_to_catch <= ep.steps);
        REQUIRE(ep.steps <= sc.episode_steps);
      }
    }
    REQUIRE(caught > 0);  // the omniscient chaser catches a unit-speed walker
    REQUIRE(out.summary.capture_pct == Approx(100.0 * caught / 8));
  }
}
