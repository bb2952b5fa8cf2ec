#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vbpomdp/condense.hpp"
#include "vbpomdp/model.hpp"
#include "vbpomdp/vb.hpp"

namespace vbpomdp {

struct FilterConfig {
  CondenseConfig condense;
  double vb_tol = 1e-6;
  int vb_max_iter = 100;
};

/// Raised when a measurement update leaves no posterior mass (the
/// observation contradicts the whole belief support); callers typically
/// fall back to the prediction.
class zero_mass_error : public std::runtime_error {
 public:
  explicit zero_mass_error(const std::string& what) : std::runtime_error(what) {}
};

/// Dynamics prediction: each component maps mu <- F mu + Delta(a),
/// S <- F S F' + Sigma^a. Weights and size are unchanged.
inline GaussianMixture predict(const GaussianMixture& belief, const CPOMDPModel& model, const std::string& action) {
  if (belief.kind() != MixtureKind::belief) throw std::invalid_argument("predict: input must be a belief");
  if (belief.dimension() != model.dimension()) throw std::invalid_argument("predict: dimension mismatch");
  const ActionModel& a = model.action(action);
  std::vector<GaussianComponent> out;
  out.reserve(belief.components().size());
  for (const auto& c : belief.components()) {
    VectorXd mean;
    MatrixXd cov;
    if (model.stm()) {
      mean = (*model.stm()) * c.mean() + a.delta;
      cov = (*model.stm()) * c.covariance() * model.stm()->transpose() + a.noise;
    } else {
      mean = c.mean() + a.delta;
      cov = c.covariance() + a.noise;
    }
    out.emplace_back(c.weight(), std::move(mean), 0.5 * (cov + cov.transpose()));
  }
  return {belief.dimension(), MixtureKind::belief, std::move(out)};
}

/// Measurement update: multiply by the observed label's likelihood
/// (variational product for softmax models, exact pairwise products for GM
/// likelihoods), renormalize, condense.
inline GaussianMixture update(const GaussianMixture& belief, const CPOMDPModel& model, const std::string& label,
                              const FilterConfig& config) {
  if (belief.kind() != MixtureKind::belief) throw std::invalid_argument("update: input must be a belief");
  if (belief.dimension() != model.dimension()) throw std::invalid_argument("update: dimension mismatch");

  std::vector<GaussianComponent> joint;
  if (model.softmax_mode()) {
    const GaussianMixture prod = vb_mixture_product(belief, model.softmax(), label, config.vb_tol, config.vb_max_iter);
    joint = prod.components();
  } else {
    const GaussianMixture& lk = [&]() -> const GaussianMixture& {
      auto it = model.gm_observation().find(label);
      if (it == model.gm_observation().end()) throw std::invalid_argument("update: unknown label " + label);
      return it->second;
    }();
    joint.reserve(belief.components().size() * lk.components().size());
    for (const auto& b : belief.components())
      for (const auto& l : lk.components()) joint.push_back(gaussian_product(b, l));
  }

  // Weights are positive by construction; drop any that underflowed to zero.
  std::erase_if(joint, [](const GaussianComponent& c) { return !(c.weight() > 0.0); });
  double mass = 0.0;
  for (const auto& c : joint) mass += c.weight();
  if (!(mass > 1e-300)) throw zero_mass_error("update: observation '" + label + "' leaves no posterior mass");

  const GaussianMixture posterior =
      normalize(GaussianMixture(belief.dimension(), MixtureKind::reward_or_alpha, std::move(joint)));
  return cluster_condense(posterior, config.condense);
}

/// Conditions a belief on a direct measurement of one state axis (Kalman
/// update with H = e_axis). Used for coordinates the agent observes about
/// itself, e.g. its own position in a joint seeker/target state.
inline GaussianMixture condition_on_axis(const GaussianMixture& belief, int axis, double value,
                                         double noise_var = 1e-4) {
  if (belief.kind() != MixtureKind::belief) throw std::invalid_argument("condition_on_axis: input must be a belief");
  if (axis < 0 || axis >= belief.dimension()) throw std::invalid_argument("condition_on_axis: axis out of range");
  if (!(noise_var > 0.0)) throw std::invalid_argument("condition_on_axis: noise variance must be positive");
  std::vector<GaussianComponent> out;
  out.reserve(belief.components().size());
  for (const auto& c : belief.components()) {
    const double innovation_var = c.covariance()(axis, axis) + noise_var;
    const VectorXd gain = c.covariance().col(axis) / innovation_var;
    const double residual = value - c.mean()[axis];
    const VectorXd mean = c.mean() + gain * residual;
    MatrixXd cov = c.covariance() - gain * c.covariance().row(axis);
    cov = 0.5 * (cov + cov.transpose());
    const double lik = std::exp(-0.5 * residual * residual / innovation_var) / std::sqrt(2.0 * M_PI * innovation_var);
    const double w = c.weight() * lik;
    if (w > 0.0) out.emplace_back(w, mean, std::move(cov));
  }
  double mass = 0.0;
  for (const auto& c : out) mass += c.weight();
  if (!(mass > 1e-300)) throw zero_mass_error("condition_on_axis: measurement leaves no posterior mass");
  return normalize(GaussianMixture(belief.dimension(), MixtureKind::reward_or_alpha, std::move(out)));
}

}  // namespace vbpomdp
