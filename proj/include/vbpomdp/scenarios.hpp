#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbpomdp/sim.hpp"

namespace vbpomdp {
namespace scenarios {

namespace detail {

inline MatrixXd diag2(double a, double b) {
  MatrixXd m = MatrixXd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

/// One 1D kernel of a profile over the difference u = rob - cop:
/// profile(u) = sum_k coeff_k * phi(u | center_k, var_k).
struct BandKernel {
  double coeff;
  double u_center;
  double u_var;
};

/// Expands profile(u) * 1(along the diagonal) into 2D components over the
/// [cop, rob] square [lo, hi]^2. The diagonal direction is covered by a
/// kernel-quadrature plateau; the difference coordinate u maps onto the
/// rotated axis as u / sqrt(2), which scales variances by 1/2 and kernel
/// masses by 1/sqrt(2).
inline std::vector<GaussianComponent> diagonal_band(const std::vector<BandKernel>& profile, int v_kernels,
                                                    double lo = 0.0, double hi = 5.0) {
  const double v_len = (hi - lo) * std::sqrt(2.0);
  const double h_v = v_len / v_kernels;
  const double sigma_v2 = (0.75 * h_v) * (0.75 * h_v);
  std::vector<GaussianComponent> comps;
  comps.reserve(profile.size() * v_kernels);
  for (const auto& k : profile) {
    const double cu = 0.5 * k.u_var;
    MatrixXd cov(2, 2);
    cov(0, 0) = cov(1, 1) = 0.5 * (cu + sigma_v2);
    cov(0, 1) = cov(1, 0) = 0.5 * (sigma_v2 - cu);
    for (int j = 0; j < v_kernels; ++j) {
      const double diag = lo + (j + 0.5) * h_v / std::sqrt(2.0);
      VectorXd mean(2);
      mean << diag - 0.5 * k.u_center, diag + 0.5 * k.u_center;
      comps.emplace_back(k.coeff * h_v / std::sqrt(2.0), std::move(mean), cov);
    }
  }
  return comps;
}

/// Nonnegative least-squares fit of profile coefficients for a symmetric
/// kernel basis against a target function of u. Projected coordinate
/// descent; deterministic.
inline std::vector<double> fit_symmetric_profile(const std::function<double(double)>& target,
                                                 const std::vector<double>& centers,
                                                 const std::vector<double>& sigmas) {
  const int n = static_cast<int>(centers.size());
  std::vector<double> grid;
  for (double u = -5.5; u <= 5.5 + 1e-9; u += 0.1) grid.push_back(u);
  const int m = static_cast<int>(grid.size());
  MatrixXd basis(m, n);
  VectorXd g(m);
  for (int r = 0; r < m; ++r) {
    g[r] = target(grid[r]);
    for (int c = 0; c < n; ++c) {
      const double s2 = sigmas[c] * sigmas[c];
      const auto phi = [&](double x) { return std::exp(-0.5 * x * x / s2) / std::sqrt(2.0 * M_PI * s2); };
      basis(r, c) = phi(grid[r] - centers[c]) + phi(grid[r] + centers[c]);
    }
  }
  VectorXd a = VectorXd::Zero(n);
  for (int sweep = 0; sweep < 400; ++sweep) {
    for (int c = 0; c < n; ++c) {
      const VectorXd residual = g - basis * a;
      const double step = basis.col(c).dot(residual) / basis.col(c).squaredNorm();
      a[c] = std::max(0.0, a[c] + step);
    }
  }
  return {a.data(), a.data() + n};
}

/// Colinear semantic detector: detect around |rob - cop| <= radius plus
/// no-detect classes on either side, 3 classes / 9 parameters.
inline SoftmaxModel colinear_softmax(double steep = 4.0, double radius = 0.5) {
  std::vector<SoftmaxClass> classes(3);
  classes[0] = {VectorXd::Zero(2), std::log(2.0 * std::cosh(steep * radius))};
  classes[1] = {(VectorXd(2) << steep, -steep).finished(), 0.0};   // robber left of cop
  classes[2] = {(VectorXd(2) << -steep, steep).finished(), 0.0};   // robber right of cop
  return {2, std::move(classes), {{"Detect", {0}}, {"No Detect", {1, 2}}}};
}

/// Reward surface for the colinear chase: a positive band along the
/// cop == rob diagonal on a flat negative background, approximating
/// +3 inside |rob - cop| <= 0.5 and -1 outside.
inline GaussianMixture colinear_reward() {
  const double amplitude = 4.0;                      // payoff - penalty
  const double u_var = 0.125 / std::log(2.0);        // half height at |rob - cop| = 0.5
  const std::vector<BandKernel> profile{{amplitude * std::sqrt(2.0 * M_PI * u_var), 0.0, u_var}};
  auto comps = diagonal_band(profile, 8);
  // flat -1 background over the (0,5)^2 box
  const double bg_var = 100.0;
  comps.emplace_back(-2.0 * M_PI * bg_var, (VectorXd(2) << 2.5, 2.5).finished(), bg_var * MatrixXd::Identity(2, 2));
  return {2, MixtureKind::reward_or_alpha, std::move(comps)};
}

/// GM-likelihood twin of the colinear softmax sensor. Both labels are
/// functions of the difference u alone, so each is a fitted u-profile
/// spread along the diagonal; they share the same diagonal plateau so the
/// kernel-quadrature envelope cancels out of the label ratio. Kept coarse
/// on purpose: the classical planner's cost grows with every extra mixand.
inline GMObservation colinear_gm_observation(const SoftmaxModel& softmax) {
  const auto prob_at = [&](const std::string& label, double u) {
    return softmax.label_prob((VectorXd(2) << 2.5 - 0.5 * u, 2.5 + 0.5 * u).finished(), label);
  };
  const int v_kernels = 4;
  GMObservation obs;
  {
    // Detect: one Gaussian bump matched at the peak and the 50% boundary.
    const double peak = prob_at("Detect", 0.0);
    const double half = prob_at("Detect", 0.5);
    const double u_var = 0.125 / std::log(peak / half);
    const std::vector<BandKernel> profile{{peak * std::sqrt(2.0 * M_PI * u_var), 0.0, u_var}};
    obs.emplace("Detect", GaussianMixture(2, MixtureKind::likelihood, diagonal_band(profile, v_kernels)));
  }
  {
    // No Detect: symmetric rising flanks, coefficients fitted to the
    // complementary probability.
    const std::vector<double> centers{0.7, 1.4, 2.4, 3.9};
    const std::vector<double> sigmas{0.4, 0.6, 0.95, 1.4};
    const auto coeffs =
        fit_symmetric_profile([&](double u) { return prob_at("No Detect", u); }, centers, sigmas);
    std::vector<BandKernel> profile;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (coeffs[i] <= 1e-6) continue;
      profile.push_back({coeffs[i], centers[i], sigmas[i] * sigmas[i]});
      profile.push_back({coeffs[i], -centers[i], sigmas[i] * sigmas[i]});
    }
    obs.emplace("No Detect", GaussianMixture(2, MixtureKind::likelihood, diagonal_band(profile, v_kernels)));
  }
  return obs;
}

inline GaussianMixture colinear_initial_belief() {
  std::vector<GaussianComponent> comps;
  for (double rob : {1.0, 2.0, 3.0, 4.0})
    comps.emplace_back(0.25, (VectorXd(2) << 2.5, rob).finished(), diag2(0.01, 0.7));
  return {2, MixtureKind::belief, std::move(comps)};
}

inline std::map<std::string, VectorXd> cardinal_moves() {
  return {{"East", (VectorXd(2) << 1, 0).finished()},
          {"West", (VectorXd(2) << -1, 0).finished()},
          {"North", (VectorXd(2) << 0, 1).finished()},
          {"South", (VectorXd(2) << 0, -1).finished()},
          {"Stay", VectorXd::Zero(2)}};
}

/// Planner model for the 2D difference-state search. The state is
/// s = robber - cop, so cop displacements enter with negated sign and the
/// per-action reward peaks where the move lands the cop on the robber.
inline CPOMDPModel search2d_model(double robber_var, const ObservationModel& observation) {
  const double cop_var = 0.01;
  std::vector<ActionModel> actions;
  std::map<std::string, GaussianMixture> rewards;
  for (const auto& [name, move] : cardinal_moves()) {
    const bool stay = name == "Stay";
    const double noise = robber_var + (stay ? 1e-4 : cop_var);
    actions.push_back({name, -move, noise * MatrixXd::Identity(2, 2)});
    rewards.emplace(name, GaussianMixture(2, MixtureKind::reward_or_alpha,
                                          {GaussianComponent(10.0, move, MatrixXd::Identity(2, 2))}));
  }
  return {2, std::move(actions), std::nullopt, std::move(rewards), observation, 0.95};
}

inline CPOMDPModel ncv4d_model(double accel_var) {
  MatrixXd f = MatrixXd::Identity(4, 4);
  f(0, 2) = 1.0;
  f(1, 3) = 1.0;
  const double cop_var = 0.01;
  std::vector<ActionModel> actions;
  std::map<std::string, GaussianMixture> rewards;
  MatrixXd reward_cov = MatrixXd::Identity(4, 4);
  reward_cov(2, 2) = 25.0;
  reward_cov(3, 3) = 25.0;
  for (const auto& [name, move] : cardinal_moves()) {
    const bool stay = name == "Stay";
    VectorXd delta = VectorXd::Zero(4);
    delta.head(2) = -move;
    MatrixXd noise = MatrixXd::Zero(4, 4);
    for (int axis = 0; axis < 2; ++axis) {
      noise(axis, axis) = accel_var / 3.0 + (stay ? 1e-4 : cop_var);
      noise(axis, axis + 2) = accel_var / 2.0;
      noise(axis + 2, axis) = accel_var / 2.0;
      noise(axis + 2, axis + 2) = accel_var;
    }
    actions.push_back({name, std::move(delta), std::move(noise)});
    VectorXd peak = VectorXd::Zero(4);
    peak.head(2) = move;
    rewards.emplace(name, GaussianMixture(4, MixtureKind::reward_or_alpha,
                                          {GaussianComponent(10.0, std::move(peak), reward_cov)}));
  }
  const SoftmaxModel obs4d = pad_dimensions(build_relative_model(RelativeModelKind::proximity5, 2.0), 4, {0, 1});
  return {4, std::move(actions), f, std::move(rewards), obs4d, 0.95};
}

inline GaussianMixture diff2d_initial_belief() {
  return {2, MixtureKind::belief, {GaussianComponent(1.0, VectorXd::Zero(2), 4.0 * MatrixXd::Identity(2, 2))}};
}

inline GaussianMixture diff4d_initial_belief() {
  MatrixXd cov = MatrixXd::Identity(4, 4);
  cov(0, 0) = cov(1, 1) = 4.0;
  cov(2, 2) = cov(3, 3) = 0.25;
  return {4, MixtureKind::belief, {GaussianComponent(1.0, VectorXd::Zero(4), std::move(cov))}};
}

inline std::map<std::string, CopAction> cardinal_cop_actions() {
  std::map<std::string, CopAction> out;
  for (const auto& [name, move] : cardinal_moves()) out.emplace(name, CopAction{move, name == "Stay" ? 0.0 : 0.01});
  return out;
}

inline Scenario search2d_base(double robber_var, const ObservationModel& observation) {
  Scenario s{.name = "search2d", .model = search2d_model(robber_var, observation),
             .initial_belief = diff2d_initial_belief()};
  s.truth_dynamics = TruthDynamics::ncp;
  s.cop_dim = 2;
  s.joint_state = false;
  s.velocity_state = false;
  s.cop_actions = cardinal_cop_actions();
  s.robber_walk_var = robber_var;
  s.cop_start = VectorXd::Zero(2);
  s.robber_spawn_sigma = 2.0;
  s.reward_rule = {1.0, 5.0, 0.0};
  return s;
}

}  // namespace detail

inline Scenario colinear() {
  using namespace detail;
  const SoftmaxModel softmax = colinear_softmax();
  const GaussianMixture reward = colinear_reward();
  const double rob_var = 0.5;
  std::vector<ActionModel> actions{
      {"left", (VectorXd(2) << -0.5, 0).finished(), diag2(0.01, rob_var)},
      {"right", (VectorXd(2) << 0.5, 0).finished(), diag2(0.01, rob_var)},
      {"stay", VectorXd::Zero(2), diag2(1e-4, rob_var)},
  };
  std::map<std::string, GaussianMixture> rewards{{"left", reward}, {"right", reward}, {"stay", reward}};

  Scenario s{.name = "colinear",
             .model = CPOMDPModel(2, actions, std::nullopt, rewards, softmax, 0.95),
             .initial_belief = colinear_initial_belief()};
  s.gm_model = CPOMDPModel(2, actions, std::nullopt, rewards, colinear_gm_observation(softmax), 0.95);
  s.truth_dynamics = TruthDynamics::ncp;
  s.cop_dim = 1;
  s.joint_state = true;
  s.self_observe_axes = {0};  // the cop knows its own position
  s.cop_actions = {{"left", {(VectorXd(1) << -0.5).finished(), 0.01}},
                   {"right", {(VectorXd(1) << 0.5).finished(), 0.01}},
                   {"stay", {VectorXd::Zero(1), 0.0}}};
  s.robber_walk_var = rob_var;
  s.clamp_bounds = {{0.0, 5.0}};
  s.cop_start = (VectorXd(1) << 2.5).finished();
  s.robber_spawn_uniform = true;
  s.robber_spawn_lo = 0.5;
  s.robber_spawn_hi = 4.5;
  s.reward_rule = {0.5, 3.0, -1.0};
  return s;
}

inline Scenario search2d() {
  Scenario s = detail::search2d_base(1.0, build_relative_model(RelativeModelKind::proximity5, 2.0));
  s.name = "search2d";
  return s;
}

inline Scenario search2d_slow() {
  Scenario s = detail::search2d_base(0.7, build_relative_model(RelativeModelKind::proximity5, 2.0));
  s.name = "search2d-slow";
  return s;
}

inline Scenario search2d_mms() {
  const SoftmaxModel proximity = build_relative_model(RelativeModelKind::proximity5, 2.0);
  const SoftmaxModel mms = regroup_labels(proximity, {{"Detect", {0}}, {"No Detect", {1, 2, 3, 4}}});
  Scenario s = detail::search2d_base(1.0, mms);
  s.name = "search2d-mms";
  s.capture_rule = CaptureRule{1.0};
  return s;
}

inline Scenario ncv4d() {
  Scenario s{.name = "ncv4d", .model = detail::ncv4d_model(0.02), .initial_belief = detail::diff4d_initial_belief()};
  s.truth_dynamics = TruthDynamics::ncv;
  s.cop_dim = 2;
  s.velocity_state = true;
  s.cop_actions = detail::cardinal_cop_actions();
  s.ncv_accel_var = 0.02;
  s.initial_speed_sigma = 0.2;
  s.cop_start = VectorXd::Zero(2);
  s.robber_spawn_sigma = 2.0;
  s.reward_rule = {1.0, 5.0, 0.0};
  return s;
}

/// Mismatch grid cells: the planner keeps its model while the environment
/// runs the other dynamics.
inline Scenario ncp_policy_ncv_truth() {
  Scenario s = search2d();
  s.name = "ncp-policy-ncv-truth";
  s.truth_dynamics = TruthDynamics::ncv;
  s.ncv_accel_var = 0.02;
  s.initial_speed_sigma = 0.2;
  return s;
}

inline Scenario ncv_policy_ncp_truth() {
  Scenario s = ncv4d();
  s.name = "ncv-policy-ncp-truth";
  s.truth_dynamics = TruthDynamics::ncp;
  s.robber_walk_var = 1.0;
  return s;
}

inline Scenario by_name(const std::string& name) {
  if (name == "colinear") return colinear();
  if (name == "search2d") return search2d();
  if (name == "search2d-slow") return search2d_slow();
  if (name == "search2d-mms") return search2d_mms();
  if (name == "ncv4d") return ncv4d();
  if (name == "ncp-policy-ncv-truth") return ncp_policy_ncv_truth();
  if (name == "ncv-policy-ncp-truth") return ncv_policy_ncp_truth();
  throw std::invalid_argument("unknown scenario: " + name);
}

inline std::vector<std::string> builtin_names() {
  return {"colinear", "search2d", "search2d-slow", "search2d-mms", "ncv4d", "ncp-policy-ncv-truth",
          "ncv-policy-ncp-truth"};
}

}  // namespace scenarios
}  // namespace vbpomdp
