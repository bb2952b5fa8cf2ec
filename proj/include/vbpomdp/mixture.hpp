#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vbpomdp/gaussian.hpp"

namespace vbpomdp {

/// What a mixture represents decides which weight invariants hold.
enum class MixtureKind {
  belief,           // weights > 0, sum to 1
  likelihood,       // weights > 0, sum unconstrained
  reward_or_alpha,  // weights unconstrained
};

inline const char* to_string(MixtureKind k) {
  switch (k) {
    case MixtureKind::belief: return "belief";
    case MixtureKind::likelihood: return "likelihood";
    case MixtureKind::reward_or_alpha: return "reward-or-alpha";
  }
  throw std::logic_error("unknown MixtureKind");
}

inline MixtureKind mixture_kind_from_string(const std::string& s) {
  if (s == "belief") return MixtureKind::belief;
  if (s == "likelihood") return MixtureKind::likelihood;
  if (s == "reward-or-alpha") return MixtureKind::reward_or_alpha;
  throw std::invalid_argument("unknown mixture kind: " + s);
}

/// Weighted sum of Gaussian components over R^N. Beliefs are normalized
/// pdfs; reward and alpha functions are unnormalized and may carry negative
/// weights. Immutable after construction.
class GaussianMixture {
 public:
  GaussianMixture(int dimension, MixtureKind kind, std::vector<GaussianComponent> components)
      : dim_(dimension), kind_(kind), comps_(std::move(components)) {
    if (dim_ <= 0) throw std::invalid_argument("GaussianMixture: dimension must be positive");
    for (const auto& c : comps_)
      if (c.dimension() != dim_) throw std::invalid_argument("GaussianMixture: component dimension mismatch");
    if (kind_ == MixtureKind::belief || kind_ == MixtureKind::likelihood) {
      double sum = 0.0;
      for (const auto& c : comps_) {
        if (!(c.weight() > 0.0)) throw std::invalid_argument("GaussianMixture: nonpositive weight in normalized-kind mixture");
        sum += c.weight();
      }
      if (kind_ == MixtureKind::belief && std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("GaussianMixture: belief weights do not sum to 1");
    }
  }

  int dimension() const { return dim_; }
  MixtureKind kind() const { return kind_; }
  const std::vector<GaussianComponent>& components() const { return comps_; }
  int size() const { return static_cast<int>(comps_.size()); }
  bool empty() const { return comps_.empty(); }

  double evaluate(const VectorXd& point) const {
    if (point.size() != dim_) throw std::invalid_argument("GaussianMixture::evaluate: dimension mismatch");
    double v = 0.0;
    for (const auto& c : comps_) v += c.evaluate(point);
    return v;
  }

  double total_weight() const {
    double s = 0.0;
    for (const auto& c : comps_) s += c.weight();
    return s;
  }

  /// Sum of w_k * mu_k (the mixture mean times total weight).
  VectorXd weighted_mean() const {
    VectorXd m = VectorXd::Zero(dim_);
    for (const auto& c : comps_) m += c.weight() * c.mean();
    return m;
  }

  /// Sum of w_k * (S_k + mu_k mu_k^T) (second raw moment times total weight).
  MatrixXd weighted_second_moment() const {
    MatrixXd s = MatrixXd::Zero(dim_, dim_);
    for (const auto& c : comps_) s += c.weight() * (c.covariance() + c.mean() * c.mean().transpose());
    return s;
  }

  GaussianMixture with_kind(MixtureKind k) const { return {dim_, k, comps_}; }

  GaussianMixture scaled(double factor) const {
    std::vector<GaussianComponent> out;
    out.reserve(comps_.size());
    for (const auto& c : comps_) out.push_back(c.scaled(factor));
    return {dim_, MixtureKind::reward_or_alpha, std::move(out)};
  }

 private:
  int dim_;
  MixtureKind kind_;
  std::vector<GaussianComponent> comps_;
};

/// <f, g> = sum_{k,q} w_k w_q phi(mu_q | mu_k, S_k + S_q). Symmetric and
/// bilinear in the weights; this is the value-function inner product.
inline double inner_product(const GaussianMixture& f, const GaussianMixture& g) {
  if (f.dimension() != g.dimension()) throw std::invalid_argument("inner_product: dimension mismatch");
  double acc = 0.0;
  MatrixXd sum(f.dimension(), f.dimension());
  for (const auto& a : f.components()) {
    for (const auto& b : g.components()) {
      sum = a.covariance() + b.covariance();
      acc += a.weight() * b.weight() * gaussian_density(a.mean(), sum, b.mean());
    }
  }
  return acc;
}

/// Scales weights to unit mass and tags the result as a belief. Operates in
/// a rescaled domain when the largest weight drops below 1e-100 so that
/// sums of denormal weights cannot flush to zero.
inline GaussianMixture normalize(const GaussianMixture& mixture) {
  if (mixture.empty()) throw std::invalid_argument("normalize: empty mixture");
  double max_w = 0.0;
  for (const auto& c : mixture.components()) {
    if (!(c.weight() > 0.0)) throw std::invalid_argument("normalize: nonpositive weight");
    max_w = std::max(max_w, c.weight());
  }
  if (!(max_w > 0.0)) throw std::invalid_argument("normalize: nonpositive mass");
  const double prescale = (max_w < 1e-100) ? 1.0 / max_w : 1.0;
  double sum = 0.0;
  for (const auto& c : mixture.components()) sum += c.weight() * prescale;
  if (!(sum > 0.0) || !std::isfinite(sum)) throw std::invalid_argument("normalize: nonpositive mass");
  std::vector<GaussianComponent> out;
  out.reserve(mixture.components().size());
  for (const auto& c : mixture.components()) out.push_back(c.with_weight(c.weight() * prescale / sum));
  return {mixture.dimension(), MixtureKind::belief, std::move(out)};
}

namespace detail {

/// Deterministic ordering of two mixtures by content so the cross-term
/// accumulation order (hence its floating-point value) is identical for
/// (f, g) and (g, f).
inline bool canonical_before(const GaussianMixture& f, const GaussianMixture& g) {
  if (f.size() != g.size()) return f.size() < g.size();
  for (int i = 0; i < f.size(); ++i) {
    const auto& a = f.components()[i];
    const auto& b = g.components()[i];
    if (a.weight() != b.weight()) return a.weight() < b.weight();
    for (int j = 0; j < f.dimension(); ++j)
      if (a.mean()[j] != b.mean()[j]) return a.mean()[j] < b.mean()[j];
    for (int r = 0; r < f.dimension(); ++r)
      for (int c = 0; c < f.dimension(); ++c)
        if (a.covariance()(r, c) != b.covariance()(r, c)) return a.covariance()(r, c) < b.covariance()(r, c);
  }
  return true;  // identical content, either order accumulates identically
}

struct IsdTerms {
  double j_first;   // self term of the canonically first argument
  double j_cross;
  double j_second;
};

/// All three J terms evaluated in a canonical argument order, so the
/// floating-point results for (f, g) and (g, f) are bitwise identical.
inline IsdTerms isd_terms(const GaussianMixture& f, const GaussianMixture& g) {
  const GaussianMixture& a = canonical_before(f, g) ? f : g;
  const GaussianMixture& b = canonical_before(f, g) ? g : f;
  return {inner_product(a, a), inner_product(a, b), inner_product(b, b)};
}

}  // namespace detail

/// Integral squared difference between two mixtures,
/// ISD = J_hh - 2 J_hr + J_rr with J terms given by the inner product.
/// Symmetric in its arguments, exactly.
inline double mixture_isd(const GaussianMixture& f, const GaussianMixture& g) {
  if (f.dimension() != g.dimension()) throw std::invalid_argument("mixture_isd: dimension mismatch");
  const auto j = detail::isd_terms(f, g);
  return j.j_first - 2.0 * j.j_cross + j.j_second;
}

/// Normalized ISD, sqrt(ISD / (J_hh + J_rr)) in [0, 1] for positive-weight
/// mixtures; enables comparisons across dimensions and sizes.
inline double mixture_nisd(const GaussianMixture& f, const GaussianMixture& g) {
  if (f.dimension() != g.dimension()) throw std::invalid_argument("mixture_nisd: dimension mismatch");
  const auto j = detail::isd_terms(f, g);
  const double denom = j.j_first + j.j_second;
  if (!(denom > 0.0)) return 0.0;
  const double ratio = (j.j_first - 2.0 * j.j_cross + j.j_second) / denom;
  return std::sqrt(std::max(0.0, ratio));
}

}  // namespace vbpomdp
