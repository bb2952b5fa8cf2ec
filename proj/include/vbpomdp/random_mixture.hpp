#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vbpomdp/mixture.hpp"
#include "vbpomdp/rng.hpp"

namespace vbpomdp {

/// Benchmark mixture generator: means uniform per axis, covariances from a
/// Wishart(dof, scale*I) distribution, weights uniform.
struct MixtureGenSpec {
  int dimension = 1;
  int count = 1;
  VectorXd mean_low;   // per-axis lower bound
  VectorXd mean_high;  // per-axis upper bound
  int wishart_dof = 1;
  double wishart_scale = 1.0;
  double weight_low = 0.0;
  double weight_high = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (dimension <= 0) throw std::invalid_argument("MixtureGenSpec: dimension must be positive");
    if (count < 1) throw std::invalid_argument("MixtureGenSpec: count must be >= 1");
    if (mean_low.size() != dimension || mean_high.size() != dimension)
      throw std::invalid_argument("MixtureGenSpec: mean range dimension mismatch");
    for (int i = 0; i < dimension; ++i)
      if (!(mean_low[i] < mean_high[i])) throw std::invalid_argument("MixtureGenSpec: mean range low >= high");
    if (wishart_dof < dimension) throw std::invalid_argument("MixtureGenSpec: wishart dof must be >= dimension");
    if (!(wishart_scale > 0.0)) throw std::invalid_argument("MixtureGenSpec: wishart scale must be positive");
    if (!(weight_low < weight_high)) throw std::invalid_argument("MixtureGenSpec: weight range low >= high");
  }

  static MixtureGenSpec uniform_box(int dimension, int count, double lo, double hi, int dof, double scale,
                                    double wlo, double whi, std::uint64_t seed) {
    MixtureGenSpec s;
    s.dimension = dimension;
    s.count = count;
    s.mean_low = VectorXd::Constant(dimension, lo);
    s.mean_high = VectorXd::Constant(dimension, hi);
    s.wishart_dof = dof;
    s.wishart_scale = scale;
    s.weight_low = wlo;
    s.weight_high = whi;
    s.seed = seed;
    return s;
  }
};

namespace detail {

/// Wishart(dof, scale*I) sample as a sum of dof outer products of
/// N(0, scale*I) draws. Exact for integer dof.
inline MatrixXd wishart_draw(SplitRng& rng, int dim, int dof, double scale) {
  MatrixXd w = MatrixXd::Zero(dim, dim);
  const double sd = std::sqrt(scale);
  for (int k = 0; k < dof; ++k) {
    VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = sd * rng.normal();
    w += x * x.transpose();
  }
  return 0.5 * (w + w.transpose());
}

}  // namespace detail

/// Deterministic for a fixed seed; each component draws from its own
/// (seed, index) stream so generation order is immaterial. Draws that fail
/// the positive-definiteness admission test (possible at dof == dimension)
/// are retried on the same stream.
inline GaussianMixture random_mixture(const MixtureGenSpec& spec) {
  spec.validate();
  std::vector<GaussianComponent> comps;
  comps.reserve(spec.count);
  for (int m = 0; m < spec.count; ++m) {
    SplitRng rng = SplitRng::keyed(spec.seed, static_cast<std::uint64_t>(m));
    VectorXd mean(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) mean[i] = rng.uniform(spec.mean_low[i], spec.mean_high[i]);
    const double w = rng.uniform(spec.weight_low, spec.weight_high);
    for (int attempt = 0;; ++attempt) {
      MatrixXd cov = detail::wishart_draw(rng, spec.dimension, spec.wishart_dof, spec.wishart_scale);
      try {
        comps.emplace_back(w, mean, std::move(cov));
        break;
      } catch (const std::invalid_argument&) {
        if (attempt >= 64) throw std::runtime_error("random_mixture: could not draw an admissible covariance");
      }
    }
  }
  return {spec.dimension, MixtureKind::likelihood, std::move(comps)};
}

}  // namespace vbpomdp
