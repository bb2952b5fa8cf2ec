#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbpomdp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SoftmaxClass {
  VectorXd w;  // linear weight
  double b;    // bias
};

/// Self-normalizing semantic observation likelihood:
/// p(class c | s) = exp(w_c's + b_c) / sum_c' exp(w_c''s + b_c').
///
/// Observation labels map to nonempty class-index sets; a label grouping
/// several classes is a multimodal-softmax (MMS) observation whose
/// probability is the sum of its class probabilities. Labels partition the
/// classes. Immutable after construction.
class SoftmaxModel {
 public:
  SoftmaxModel(int dimension, std::vector<SoftmaxClass> classes, std::map<std::string, std::vector<int>> labels)
      : dim_(dimension), classes_(std::move(classes)), labels_(std::move(labels)) {
    if (dim_ <= 0) throw std::invalid_argument("SoftmaxModel: dimension must be positive");
    if (classes_.empty()) throw std::invalid_argument("SoftmaxModel: no classes");
    for (const auto& c : classes_)
      if (c.w.size() != dim_) throw std::invalid_argument("SoftmaxModel: class weight dimension mismatch");
    if (labels_.empty()) throw std::invalid_argument("SoftmaxModel: no labels");
    std::vector<int> seen(classes_.size(), 0);
    for (const auto& [name, idxs] : labels_) {
      if (idxs.empty()) throw std::invalid_argument("SoftmaxModel: empty label " + name);
      for (int i : idxs) {
        if (i < 0 || i >= static_cast<int>(classes_.size()))
          throw std::invalid_argument("SoftmaxModel: label " + name + " references unknown class");
        seen[i] += 1;
      }
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (seen[i] != 1) throw std::invalid_argument("SoftmaxModel: labels must partition the classes");
  }

  int dimension() const { return dim_; }
  int class_count() const { return static_cast<int>(classes_.size()); }
  const std::vector<SoftmaxClass>& classes() const { return classes_; }
  const std::map<std::string, std::vector<int>>& labels() const { return labels_; }

  const std::vector<int>& label_classes(const std::string& label) const {
    auto it = labels_.find(label);
    if (it == labels_.end()) throw std::invalid_argument("SoftmaxModel: unknown label " + label);
    return it->second;
  }

  std::vector<std::string> label_names() const {
    std::vector<std::string> out;
    out.reserve(labels_.size());
    for (const auto& [name, _] : labels_) out.push_back(name);
    return out;
  }

  VectorXd activations(const VectorXd& state) const {
    if (state.size() != dim_) throw std::invalid_argument("SoftmaxModel: state dimension mismatch");
    VectorXd a(class_count());
    for (int c = 0; c < class_count(); ++c) a[c] = classes_[c].w.dot(state) + classes_[c].b;
    return a;
  }

  /// Per-class probabilities, computed with max subtraction so large
  /// activations cannot overflow.
  VectorXd class_probabilities(const VectorXd& state) const {
    VectorXd a = activations(state);
    const double m = a.maxCoeff();
    VectorXd e = (a.array() - m).exp();
    return e / e.sum();
  }

  double class_prob(const VectorXd& state, int class_index) const {
    if (class_index < 0 || class_index >= class_count()) throw std::invalid_argument("SoftmaxModel: class index out of range");
    return class_probabilities(state)[class_index];
  }

  double label_prob(const VectorXd& state, const std::string& label) const {
    const auto& idxs = label_classes(label);
    const VectorXd p = class_probabilities(state);
    double s = 0.0;
    for (int i : idxs) s += p[i];
    return s;
  }

 private:
  int dim_;
  std::vector<SoftmaxClass> classes_;
  std::map<std::string, std::vector<int>> labels_;
};

/// Embeds a model into a higher-dimensional state space: axis_map[i] names
/// the new axis carrying old axis i; unmapped new axes get zero weight, so
/// label probabilities ignore them. Biases are unchanged.
inline SoftmaxModel pad_dimensions(const SoftmaxModel& model, int new_dim, const std::vector<int>& axis_map) {
  if (new_dim < model.dimension()) throw std::invalid_argument("pad_dimensions: new dimension smaller than current");
  if (static_cast<int>(axis_map.size()) != model.dimension())
    throw std::invalid_argument("pad_dimensions: axis map must cover every old axis");
  std::vector<int> used(new_dim, 0);
  for (int a : axis_map) {
    if (a < 0 || a >= new_dim) throw std::invalid_argument("pad_dimensions: axis map out of range");
    if (used[a]++) throw std::invalid_argument("pad_dimensions: axis map not injective");
  }
  std::vector<SoftmaxClass> classes;
  classes.reserve(model.class_count());
  for (const auto& c : model.classes()) {
    VectorXd w = VectorXd::Zero(new_dim);
    for (int i = 0; i < model.dimension(); ++i) w[axis_map[i]] = c.w[i];
    classes.push_back({std::move(w), c.b});
  }
  return {new_dim, std::move(classes), model.labels()};
}

enum class RelativeModelKind { proximity5, detect_nodetect3 };

/// Geometric synthesis of the coarse relative-position sensors.
///
/// proximity5 (2D): Near at the origin plus one class per cardinal
/// half-plane, w = scale * unit normal, b = 0; the Near bias puts its 50%
/// contour at radius 1. detect_nodetect3 (1D relative coordinate): Detect
/// around the origin with two flanking classes grouped under "No Detect",
/// same 50%-at-radius-1 rule. `scale` sharpens the boundaries.
inline SoftmaxModel build_relative_model(RelativeModelKind kind, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("build_relative_model: scale must be positive");
  if (kind == RelativeModelKind::proximity5) {
    std::vector<SoftmaxClass> classes(5);
    const double near_bias = std::log(2.0 + 2.0 * std::cosh(scale));
    classes[0] = {VectorXd::Zero(2), near_bias};                       // Near
    classes[1] = {(VectorXd(2) << scale, 0).finished(), 0.0};          // East
    classes[2] = {(VectorXd(2) << -scale, 0).finished(), 0.0};         // West
    classes[3] = {(VectorXd(2) << 0, scale).finished(), 0.0};          // North
    classes[4] = {(VectorXd(2) << 0, -scale).finished(), 0.0};         // South
    std::map<std::string, std::vector<int>> labels{
        {"Near", {0}}, {"East", {1}}, {"West", {2}}, {"North", {3}}, {"South", {4}}};
    return {2, std::move(classes), std::move(labels)};
  }
  std::vector<SoftmaxClass> classes(3);
  const double detect_bias = std::log(2.0 * std::cosh(scale));
  classes[0] = {VectorXd::Zero(1), detect_bias};                    // Detect
  classes[1] = {(VectorXd(1) << -scale).finished(), 0.0};           // no detect, negative side
  classes[2] = {(VectorXd(1) << scale).finished(), 0.0};            // no detect, positive side
  std::map<std::string, std::vector<int>> labels{{"Detect", {0}}, {"No Detect", {1, 2}}};
  return {1, std::move(classes), std::move(labels)};
}

/// Regroups an existing model's classes under new labels (e.g. collapsing
/// the four cardinal proximity classes into a single "No Detect" MMS label).
inline SoftmaxModel regroup_labels(const SoftmaxModel& model, std::map<std::string, std::vector<int>> labels) {
  return {model.dimension(), model.classes(), std::move(labels)};
}

}  // namespace vbpomdp
