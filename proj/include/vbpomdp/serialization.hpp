#pragma once

#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>

#include "vbpomdp/model.hpp"
#include "vbpomdp/scenarios.hpp"
#include "vbpomdp/sim.hpp"

namespace vbpomdp {

using json = nlohmann::json;

inline json to_json(const VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected array for vector");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

inline json to_json(const MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

inline MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected row-major matrix");
  const auto rows = j.size();
  const auto cols = j[0].size();
  MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw std::invalid_argument("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

// ---- Gaussian mixtures: {dimension, kind, components:[{weight, mean, covariance}]}

inline json to_json(const GaussianMixture& m) {
  json comps = json::array();
  for (const auto& c : m.components())
    comps.push_back({{"weight", c.weight()}, {"mean", to_json(c.mean())}, {"covariance", to_json(c.covariance())}});
  return {{"dimension", m.dimension()}, {"kind", to_string(m.kind())}, {"components", comps}};
}

inline GaussianMixture mixture_from_json(const json& j) {
  try {
    const int dim = j.at("dimension").get<int>();
    const MixtureKind kind = mixture_kind_from_string(j.at("kind").get<std::string>());
    std::vector<GaussianComponent> comps;
    for (const auto& c : j.at("components"))
      comps.emplace_back(c.at("weight").get<double>(), vector_from_json(c.at("mean")),
                         matrix_from_json(c.at("covariance")));
    return {dim, kind, std::move(comps)};
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("mixture: ") + e.what());
  }
}

// ---- Softmax models: {dimension, classes:[{w, b}], labels:{name:[indices]}}

inline json to_json(const SoftmaxModel& m) {
  json classes = json::array();
  for (const auto& c : m.classes()) classes.push_back({{"w", to_json(c.w)}, {"b", c.b}});
  json labels = json::object();
  for (const auto& [name, idxs] : m.labels()) labels[name] = idxs;
  return {{"dimension", m.dimension()}, {"classes", classes}, {"labels", labels}};
}

inline SoftmaxModel softmax_from_json(const json& j) {
  try {
    const int dim = j.at("dimension").get<int>();
    std::vector<SoftmaxClass> classes;
    for (const auto& c : j.at("classes")) classes.push_back({vector_from_json(c.at("w")), c.at("b").get<double>()});
    std::map<std::string, std::vector<int>> labels;
    for (const auto& [name, idxs] : j.at("labels").items()) labels[name] = idxs.get<std::vector<int>>();
    return {dim, std::move(classes), std::move(labels)};
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("softmax model: ") + e.what());
  }
}

// ---- CPOMDP models

inline json to_json(const CPOMDPModel& m) {
  json actions = json::array();
  for (const auto& a : m.actions())
    actions.push_back({{"name", a.name}, {"delta", to_json(a.delta)}, {"noise", to_json(a.noise)}});
  json rewards = json::object();
  for (const auto& [name, r] : m.rewards()) rewards[name] = to_json(r);
  json obs;
  if (m.softmax_mode()) {
    obs = {{"type", "softmax"}, {"model", to_json(m.softmax())}};
  } else {
    json labels = json::object();
    for (const auto& [name, mix] : m.gm_observation()) labels[name] = to_json(mix);
    obs = {{"type", "gmLikelihood"}, {"labels", labels}};
  }
  json out{{"dimension", m.dimension()},
           {"discount", m.discount()},
           {"actions", actions},
           {"rewards", rewards},
           {"observation", obs}};
  if (m.stm()) out["stateTransition"] = to_json(*m.stm());
  return out;
}

inline CPOMDPModel model_from_json(const json& j) {
  try {
    const int dim = j.at("dimension").get<int>();
    std::vector<ActionModel> actions;
    for (const auto& a : j.at("actions"))
      actions.push_back(
          {a.at("name").get<std::string>(), vector_from_json(a.at("delta")), matrix_from_json(a.at("noise"))});
    std::map<std::string, GaussianMixture> rewards;
    for (const auto& [name, r] : j.at("rewards").items()) rewards.emplace(name, mixture_from_json(r));
    std::optional<MatrixXd> stm;
    if (j.contains("stateTransition")) stm = matrix_from_json(j.at("stateTransition"));
    const auto& obs = j.at("observation");
    const std::string type = obs.at("type").get<std::string>();
    ObservationModel observation = [&]() -> ObservationModel {
      if (type == "softmax") return softmax_from_json(obs.at("model"));
      if (type == "gmLikelihood") {
        GMObservation gm;
        for (const auto& [name, mix] : obs.at("labels").items()) gm.emplace(name, mixture_from_json(mix));
        return gm;
      }
      throw std::invalid_argument("unknown observation type: " + type);
    }();
    return {dim, std::move(actions), std::move(stm), std::move(rewards), std::move(observation),
            j.at("discount").get<double>()};
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model: ") + e.what());
  }
}

// ---- Policies: {horizon, alphas:[{action, gm}]}

inline json to_json(const PolicySet& p) {
  json alphas = json::array();
  for (const auto& a : p.alphas) alphas.push_back({{"action", a.action}, {"gm", to_json(a.gm)}});
  return {{"horizon", p.horizon}, {"alphas", alphas}};
}

inline PolicySet policy_from_json(const json& j) {
  try {
    PolicySet p;
    p.horizon = j.at("horizon").get<int>();
    for (const auto& a : j.at("alphas"))
      p.alphas.push_back({mixture_from_json(a.at("gm")), a.at("action").get<std::string>()});
    return p;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("policy: ") + e.what());
  }
}

// ---- Scenario files: a model plus the simulation layout

inline Scenario scenario_from_json(const json& j) {
  try {
    Scenario s{.name = j.at("name").get<std::string>(),
               .model = model_from_json(j.at("model")),
               .initial_belief = mixture_from_json(j.at("initialBelief"))};
    if (j.contains("gmModel")) s.gm_model = model_from_json(j.at("gmModel"));
    s.truth_dynamics = j.value("truthDynamics", std::string("ncp")) == "ncv" ? TruthDynamics::ncv : TruthDynamics::ncp;
    s.episode_steps = j.value("episodeSteps", 100);
    const auto& rr = j.at("rewardRule");
    s.reward_rule = {rr.at("radius").get<double>(), rr.at("payoff").get<double>(), rr.at("penalty").get<double>()};
    if (j.contains("captureRule")) s.capture_rule = CaptureRule{j.at("captureRule").at("radius").get<double>()};
    const auto& truth = j.at("truth");
    s.cop_dim = truth.at("copDim").get<int>();
    s.joint_state = truth.value("jointState", false);
    s.velocity_state = truth.value("velocityState", false);
    for (const auto& [name, a] : truth.at("copActions").items())
      s.cop_actions.emplace(name, CopAction{vector_from_json(a.at("move")), a.value("noiseVar", 0.0)});
    s.robber_walk_var = truth.value("robberWalkVar", 1.0);
    s.ncv_accel_var = truth.value("ncvAccelVar", 0.01);
    if (truth.contains("clampBounds"))
      s.clamp_bounds = {{truth.at("clampBounds")[0].get<double>(), truth.at("clampBounds")[1].get<double>()}};
    s.cop_start = vector_from_json(truth.at("copStart"));
    s.robber_spawn_uniform = truth.value("robberSpawnUniform", false);
    s.robber_spawn_lo = truth.value("robberSpawnLo", 0.0);
    s.robber_spawn_hi = truth.value("robberSpawnHi", 0.0);
    s.robber_spawn_sigma = truth.value("robberSpawnSigma", 2.0);
    s.initial_speed_sigma = truth.value("initialSpeedSigma", 0.2);
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

template <typename T>
inline void write_json_file(const std::string& path, const T& value) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << to_json(value).dump(2) << "\n";
}

/// Built-in scenario name, or a JSON scenario file path.
inline Scenario load_scenario(const std::string& name_or_path) {
  for (const auto& name : scenarios::builtin_names())
    if (name == name_or_path) return scenarios::by_name(name_or_path);
  return scenario_from_json(load_json_file(name_or_path));
}

}  // namespace vbpomdp
