#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vbpomdp/mixture.hpp"
#include "vbpomdp/softmax.hpp"

namespace vbpomdp {

struct ActionModel {
  std::string name;
  VectorXd delta;   // state-space displacement Delta(a)
  MatrixXd noise;   // Sigma^a, positive definite
};

/// Per-label unnormalized GM observation likelihoods (the classical
/// alternative to the softmax model).
using GMObservation = std::map<std::string, GaussianMixture>;

using ObservationModel = std::variant<SoftmaxModel, GMObservation>;

inline std::vector<std::string> observation_labels(const ObservationModel& obs) {
  if (std::holds_alternative<SoftmaxModel>(obs)) return std::get<SoftmaxModel>(obs).label_names();
  std::vector<std::string> out;
  for (const auto& [name, _] : std::get<GMObservation>(obs)) out.push_back(name);
  return out;
}

/// Full continuous-state POMDP problem definition: LTI dynamics
/// s' = F s + Delta(a) + noise, per-action GM rewards, a semantic
/// observation model and a discount factor.
///
/// The state-transition matrix is optional: absent means random-walk
/// dynamics (s' = s + Delta(a) + noise) and the backup skips the
/// state-transform step entirely; an explicit matrix, identity included,
/// always goes through the transform equations.
class CPOMDPModel {
 public:
  CPOMDPModel(int dimension, std::vector<ActionModel> actions, std::optional<MatrixXd> stm,
              std::map<std::string, GaussianMixture> rewards, ObservationModel observation, double discount)
      : dim_(dimension),
        actions_(std::move(actions)),
        stm_(std::move(stm)),
        rewards_(std::move(rewards)),
        observation_(std::move(observation)),
        discount_(discount) {
    if (dim_ <= 0) throw std::invalid_argument("CPOMDPModel: dimension must be positive");
    if (actions_.empty()) throw std::invalid_argument("CPOMDPModel: no actions");
    if (!(discount_ >= 0.0 && discount_ < 1.0)) throw std::invalid_argument("CPOMDPModel: discount must lie in [0, 1)");
    for (const auto& a : actions_) {
      if (a.delta.size() != dim_) throw std::invalid_argument("CPOMDPModel: action delta dimension mismatch");
      if (a.noise.rows() != dim_ || a.noise.cols() != dim_)
        throw std::invalid_argument("CPOMDPModel: action noise dimension mismatch");
      Eigen::LLT<MatrixXd> llt(a.noise);
      if (llt.info() != Eigen::Success) throw std::invalid_argument("CPOMDPModel: action noise not positive definite");
      if (!rewards_.count(a.name)) throw std::invalid_argument("CPOMDPModel: missing reward for action " + a.name);
    }
    for (const auto& [name, r] : rewards_)
      if (r.dimension() != dim_) throw std::invalid_argument("CPOMDPModel: reward dimension mismatch for " + name);
    if (stm_) {
      if (stm_->rows() != dim_ || stm_->cols() != dim_)
        throw std::invalid_argument("CPOMDPModel: state-transition matrix dimension mismatch");
      if (std::abs(stm_->determinant()) <= 1e-12)
        throw std::invalid_argument("CPOMDPModel: state-transition matrix not invertible");
    }
    const int obs_dim = std::holds_alternative<SoftmaxModel>(observation_)
                            ? std::get<SoftmaxModel>(observation_).dimension()
                            : dim_;
    if (obs_dim != dim_) throw std::invalid_argument("CPOMDPModel: observation model dimension mismatch");
    if (std::holds_alternative<GMObservation>(observation_)) {
      const auto& gm = std::get<GMObservation>(observation_);
      if (gm.empty()) throw std::invalid_argument("CPOMDPModel: no observation labels");
      for (const auto& [name, mix] : gm) {
        if (mix.dimension() != dim_) throw std::invalid_argument("CPOMDPModel: observation GM dimension mismatch");
        if (mix.kind() != MixtureKind::likelihood)
          throw std::invalid_argument("CPOMDPModel: observation GM for " + name + " must have likelihood kind");
      }
    }
  }

  int dimension() const { return dim_; }
  const std::vector<ActionModel>& actions() const { return actions_; }
  const std::optional<MatrixXd>& stm() const { return stm_; }
  const ObservationModel& observation() const { return observation_; }
  double discount() const { return discount_; }

  const ActionModel& action(const std::string& name) const {
    for (const auto& a : actions_)
      if (a.name == name) return a;
    throw std::invalid_argument("CPOMDPModel: unknown action " + name);
  }

  const GaussianMixture& reward(const std::string& action_name) const {
    auto it = rewards_.find(action_name);
    if (it == rewards_.end()) throw std::invalid_argument("CPOMDPModel: unknown action " + action_name);
    return it->second;
  }

  const std::map<std::string, GaussianMixture>& rewards() const { return rewards_; }

  std::vector<std::string> labels() const { return observation_labels(observation_); }

  bool softmax_mode() const { return std::holds_alternative<SoftmaxModel>(observation_); }
  const SoftmaxModel& softmax() const { return std::get<SoftmaxModel>(observation_); }
  const GMObservation& gm_observation() const { return std::get<GMObservation>(observation_); }

  /// Probability of each label at a state; softmax models are exact, GM
  /// likelihoods are normalized across labels pointwise.
  std::vector<double> label_probabilities(const VectorXd& state) const {
    const auto names = labels();
    std::vector<double> p(names.size(), 0.0);
    if (softmax_mode()) {
      for (std::size_t i = 0; i < names.size(); ++i) p[i] = softmax().label_prob(state, names[i]);
      return p;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
      p[i] = gm_observation().at(names[i]).evaluate(state);
      total += p[i];
    }
    if (total > 0.0)
      for (auto& v : p) v /= total;
    else
      for (auto& v : p) v = 1.0 / static_cast<double>(p.size());
    return p;
  }

 private:
  int dim_;
  std::vector<ActionModel> actions_;
  std::optional<MatrixXd> stm_;
  std::map<std::string, GaussianMixture> rewards_;
  ObservationModel observation_;
  double discount_;
};

/// One policy element: an unnormalized GM value function tagged with the
/// action that generated it.
struct AlphaFunction {
  GaussianMixture gm;
  std::string action;
};

struct PolicySet {
  std::vector<AlphaFunction> alphas;
  int horizon = 0;
};

}  // namespace vbpomdp
