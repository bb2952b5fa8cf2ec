#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbpomdp/filter.hpp"
#include "vbpomdp/model.hpp"
#include "vbpomdp/parallel.hpp"
#include "vbpomdp/pbvi.hpp"
#include "vbpomdp/rng.hpp"

namespace vbpomdp {

enum class TruthDynamics { ncp, ncv };
enum class PolicyKind { vb, gm_likelihood, greedy, perfect };

inline const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::vb: return "vb";
    case PolicyKind::gm_likelihood: return "gmLikelihood";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::perfect: return "perfect";
  }
  throw std::logic_error("unknown PolicyKind");
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "vb") return PolicyKind::vb;
  if (s == "gmLikelihood") return PolicyKind::gm_likelihood;
  if (s == "greedy") return PolicyKind::greedy;
  if (s == "perfect") return PolicyKind::perfect;
  throw std::invalid_argument("unknown policy kind: " + s);
}

struct RewardRule {
  double radius = 1.0;
  double payoff = 5.0;
  double penalty = 0.0;
};

struct CaptureRule {
  double radius = 1.0;
};

struct CopAction {
  VectorXd move;           // truth-space displacement
  double noise_var = 0.0;  // isotropic per-axis variance; zero means exact
};

/// A full simulation setting: the planner's CPOMDP model (softmax sensor,
/// optionally a GM-likelihood twin for the classical planner), the ground
/// truth dynamics the environment actually runs, and the scoring rules.
///
/// Truth state layout: [cop (cop_dim), robber (cop_dim)] plus
/// [robber velocity (cop_dim)] when the truth dynamics are NCV.
struct Scenario {
  std::string name;
  CPOMDPModel model;
  std::optional<CPOMDPModel> gm_model;
  GaussianMixture initial_belief;
  TruthDynamics truth_dynamics = TruthDynamics::ncp;
  int episode_steps = 100;
  RewardRule reward_rule;
  std::optional<CaptureRule> capture_rule;

  int cop_dim = 2;
  bool joint_state = false;      // model state is [cop, robber] (colinear layout)
  bool velocity_state = false;   // model state carries the velocity difference
  std::vector<int> self_observe_axes;  // model-state axes the seeker measures about itself
  std::map<std::string, CopAction> cop_actions;
  double robber_walk_var = 1.0;  // NCP step variance per axis
  double ncv_accel_var = 0.01;   // NCV white-acceleration intensity q
  std::optional<std::pair<double, double>> clamp_bounds;

  VectorXd cop_start;
  bool robber_spawn_uniform = false;
  double robber_spawn_lo = 0.0;
  double robber_spawn_hi = 0.0;
  double robber_spawn_sigma = 2.0;     // N(cop, sigma^2 I) spawn when not uniform
  double initial_speed_sigma = 0.2;    // NCV truth initial velocity scale

  int truth_size() const { return cop_dim * (truth_dynamics == TruthDynamics::ncv ? 3 : 2); }

  /// Projects a truth vector onto the planner model's state space.
  VectorXd model_state(const VectorXd& truth) const {
    if (joint_state) return truth.head(2 * cop_dim);
    VectorXd s(velocity_state ? 2 * cop_dim : cop_dim);
    s.head(cop_dim) = truth.segment(cop_dim, cop_dim) - truth.head(cop_dim);
    if (velocity_state) {
      if (truth_dynamics == TruthDynamics::ncv)
        s.tail(cop_dim) = truth.segment(2 * cop_dim, cop_dim);
      else
        s.tail(cop_dim).setZero();
    }
    return s;
  }

  VectorXd sample_initial_truth(SplitRng& rng) const {
    VectorXd truth = VectorXd::Zero(truth_size());
    truth.head(cop_dim) = cop_start;
    for (int i = 0; i < cop_dim; ++i) {
      truth[cop_dim + i] = robber_spawn_uniform ? rng.uniform(robber_spawn_lo, robber_spawn_hi)
                                                : cop_start[i] + robber_spawn_sigma * rng.normal();
    }
    if (truth_dynamics == TruthDynamics::ncv)
      for (int i = 0; i < cop_dim; ++i) truth[2 * cop_dim + i] = initial_speed_sigma * rng.normal();
    if (clamp_bounds)
      for (int i = 0; i < 2 * cop_dim; ++i) truth[i] = std::clamp(truth[i], clamp_bounds->first, clamp_bounds->second);
    return truth;
  }
};

struct EnvStepResult {
  VectorXd next_truth;
  std::string label;
  double reward = 0.0;
  bool captured = false;
};

/// Advances the ground truth one step under the scenario's actual dynamics
/// (independent of the planner's assumed transition model), samples a
/// semantic observation from the true sensor at the next state, and scores
/// the proximity reward rule there.
inline EnvStepResult env_step(const Scenario& scenario, const VectorXd& truth, const std::string& action,
                              SplitRng& rng) {
  if (truth.size() != scenario.truth_size()) throw std::invalid_argument("env_step: truth dimension mismatch");
  const auto it = scenario.cop_actions.find(action);
  if (it == scenario.cop_actions.end()) throw std::invalid_argument("env_step: unknown action " + action);
  const CopAction& ca = it->second;
  const int d = scenario.cop_dim;

  EnvStepResult out;
  out.next_truth = truth;
  for (int i = 0; i < d; ++i) {
    double step = ca.move[i];
    if (ca.noise_var > 0.0) step += std::sqrt(ca.noise_var) * rng.normal();
    out.next_truth[i] += step;
  }
  if (scenario.truth_dynamics == TruthDynamics::ncp) {
    const double sd = std::sqrt(scenario.robber_walk_var);
    for (int i = 0; i < d; ++i) out.next_truth[d + i] += sd * rng.normal();
  } else {
    // Discrete NCV with unit time step: position integrates velocity, both
    // receive the correlated white-acceleration noise.
    const double q = scenario.ncv_accel_var;
    const double lp = std::sqrt(q / 3.0);
    const double lv1 = 0.5 * std::sqrt(3.0 * q);
    const double lv2 = 0.5 * std::sqrt(q);
    for (int i = 0; i < d; ++i) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      const double vel = truth[2 * d + i];
      out.next_truth[d + i] += vel + lp * z1;
      out.next_truth[2 * d + i] += lv1 * z1 + lv2 * z2;
    }
  }
  if (scenario.clamp_bounds)
    for (int i = 0; i < 2 * d; ++i)
      out.next_truth[i] = std::clamp(out.next_truth[i], scenario.clamp_bounds->first, scenario.clamp_bounds->second);

  const double dist = (out.next_truth.segment(d, d) - out.next_truth.head(d)).norm();
  out.reward = dist <= scenario.reward_rule.radius ? scenario.reward_rule.payoff : scenario.reward_rule.penalty;
  out.captured = scenario.capture_rule && dist <= scenario.capture_rule->radius;

  const auto labels = scenario.model.labels();
  const auto probs = scenario.model.label_probabilities(scenario.model_state(out.next_truth));
  out.label = labels[rng.categorical(probs)];
  return out;
}

enum class BaselineKind { greedy, perfect };

/// greedy: one-step expected immediate reward through the prediction.
/// perfect: the action whose truth-space move minimizes the distance to the
/// robber's true position (truth treated as a Dirac belief).
inline std::string baseline_action(BaselineKind kind, const Scenario& scenario, const GaussianMixture& belief,
                                   const VectorXd& truth) {
  const auto& actions = scenario.model.actions();
  if (kind == BaselineKind::greedy) {
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < actions.size(); ++a) {
      const double v = inner_product(scenario.model.reward(actions[a].name), predict(belief, scenario.model, actions[a].name));
      if (v > best_value) {
        best_value = v;
        best = static_cast<int>(a);
      }
    }
    return actions[best].name;
  }
  const int d = scenario.cop_dim;
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < actions.size(); ++a) {
    const VectorXd cop_next = truth.head(d) + scenario.cop_actions.at(actions[a].name).move;
    const double dist = (truth.segment(d, d) - cop_next).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(a);
    }
  }
  return actions[best].name;
}

struct TrajectoryStep {
  VectorXd truth;
  VectorXd belief_mean;
  int belief_size = 0;
  std::string action;
  std::string label;
  double reward = 0.0;
};

struct EpisodeResult {
  double total_reward = 0.0;
  int steps = 0;
  bool caught = false;
  std::optional<int> steps_to_catch;
  std::vector<TrajectoryStep> trajectory;
};

struct BatchSummary {
  int episodes = 0;
  double mean_reward = 0.0;
  double stddev_reward = 0.0;
  double capture_pct = 0.0;
  double mean_steps_to_catch = std::numeric_limits<double>::quiet_NaN();
};

struct RunBatchResult {
  std::vector<EpisodeResult> episodes;
  BatchSummary summary;
};

namespace detail {

inline EpisodeResult run_episode(const Scenario& scenario, PolicyKind kind, const PolicySet* policy,
                                 const FilterConfig& filter_cfg, SplitRng rng, bool record_trajectory) {
  const CPOMDPModel& planner =
      (kind == PolicyKind::gm_likelihood && scenario.gm_model) ? *scenario.gm_model : scenario.model;
  VectorXd truth = scenario.sample_initial_truth(rng);
  GaussianMixture belief = scenario.initial_belief;

  EpisodeResult ep;
  ep.trajectory.reserve(record_trajectory ? scenario.episode_steps : 0);
  for (int t = 0; t < scenario.episode_steps; ++t) {
    std::string action;
    switch (kind) {
      case PolicyKind::vb:
      case PolicyKind::gm_likelihood:
        action = policy_query(*policy, belief).first;
        break;
      case PolicyKind::greedy:
        action = baseline_action(BaselineKind::greedy, scenario, belief, truth);
        break;
      case PolicyKind::perfect:
        action = baseline_action(BaselineKind::perfect, scenario, belief, truth);
        break;
    }

    const EnvStepResult step = env_step(scenario, truth, action, rng);
    ep.total_reward += step.reward;
    ep.steps = t + 1;

    const GaussianMixture predicted = predict(belief, planner, action);
    try {
      belief = update(predicted, planner, step.label, filter_cfg);
    } catch (const zero_mass_error&) {
      belief = cluster_condense(predicted, filter_cfg.condense);
    }
    if (!scenario.self_observe_axes.empty()) {
      const VectorXd observed = scenario.model_state(step.next_truth);
      for (int axis : scenario.self_observe_axes) {
        try {
          belief = condition_on_axis(belief, axis, observed[axis]);
        } catch (const zero_mass_error&) {
        }
      }
    }

    if (record_trajectory) {
      VectorXd mean = belief.weighted_mean();
      ep.trajectory.push_back({step.next_truth, std::move(mean), belief.size(), action, step.label, step.reward});
    }
    truth = step.next_truth;
    if (step.captured && !ep.caught) {
      ep.caught = true;
      ep.steps_to_catch = t + 1;
    }
    if (ep.caught && scenario.capture_rule) break;  // capture scenarios end at first catch
  }
  return ep;
}

}  // namespace detail

/// Monte-Carlo batch with one independent RNG stream per episode index, so
/// serial and parallel execution produce the same summaries.
inline RunBatchResult run_batch(const Scenario& scenario, PolicyKind kind, const PolicySet* policy, int episodes,
                                const FilterConfig& filter_cfg, std::uint64_t seed, int threads = 0,
                                bool record_trajectories = false) {
  if ((kind == PolicyKind::vb || kind == PolicyKind::gm_likelihood) && (!policy || policy->alphas.empty()))
    throw std::invalid_argument("run_batch: policy required for planner-backed runs");
  if (kind == PolicyKind::gm_likelihood && !scenario.gm_model)
    throw std::invalid_argument("run_batch: scenario has no GM-likelihood model");
  if (episodes < 0) throw std::invalid_argument("run_batch: negative episode count");

  RunBatchResult out;
  out.episodes.resize(episodes);
  parallel_for(episodes, effective_threads(threads), [&](int e) {
    out.episodes[e] = detail::run_episode(scenario, kind, policy, filter_cfg,
                                          SplitRng::keyed(seed, static_cast<std::uint64_t>(e)), record_trajectories);
  });

  BatchSummary& s = out.summary;
  s.episodes = episodes;
  if (episodes > 0) {
    double sum = 0.0;
    int caught = 0;
    double catch_steps = 0.0;
    for (const auto& ep : out.episodes) {
      sum += ep.total_reward;
      if (ep.caught) {
        ++caught;
        catch_steps += *ep.steps_to_catch;
      }
    }
    s.mean_reward = sum / episodes;
    double var = 0.0;
    for (const auto& ep : out.episodes) var += (ep.total_reward - s.mean_reward) * (ep.total_reward - s.mean_reward);
    s.stddev_reward = episodes > 1 ? std::sqrt(var / (episodes - 1)) : 0.0;
    s.capture_pct = 100.0 * caught / episodes;
    if (caught > 0) s.mean_steps_to_catch = catch_steps / caught;
  }
  return out;
}

}  // namespace vbpomdp
