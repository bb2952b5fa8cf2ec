#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "vbpomdp/mixture.hpp"
#include "vbpomdp/rng.hpp"

namespace vbpomdp {

enum class DistanceMetric { euclidean, sym_kl, jsd, wasserstein2, bhattacharyya };

inline const char* to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::euclidean: return "euclidean";
    case DistanceMetric::sym_kl: return "symKL";
    case DistanceMetric::jsd: return "jsd";
    case DistanceMetric::wasserstein2: return "wasserstein2";
    case DistanceMetric::bhattacharyya: return "bhattacharyya";
  }
  throw std::logic_error("unknown DistanceMetric");
}

inline DistanceMetric distance_metric_from_string(const std::string& s) {
  if (s == "euclidean") return DistanceMetric::euclidean;
  if (s == "symKL") return DistanceMetric::sym_kl;
  if (s == "jsd") return DistanceMetric::jsd;
  if (s == "wasserstein2") return DistanceMetric::wasserstein2;
  if (s == "bhattacharyya") return DistanceMetric::bhattacharyya;
  throw std::invalid_argument("unknown distance metric: " + s);
}

struct CondenseConfig {
  int target_size = 20;        // M-tilde
  int cluster_count = 4;       // K
  DistanceMetric metric = DistanceMetric::euclidean;
  int kmeans_max_iter = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (cluster_count < 1) throw std::invalid_argument("CondenseConfig: cluster count must be >= 1");
    if (target_size < cluster_count) throw std::invalid_argument("CondenseConfig: target size must be >= cluster count");
    if (kmeans_max_iter < 1) throw std::invalid_argument("CondenseConfig: kmeans max iter must be >= 1");
  }
};

namespace detail {

inline double log_det(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error(std::string(what) + ": singular covariance");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) acc += 2.0 * std::log(llt.matrixL()(i, i));
  return acc;
}

inline double kl_divergence(const VectorXd& mu0, const MatrixXd& s0, const VectorXd& mu1, const MatrixXd& s1) {
  const int n = static_cast<int>(mu0.size());
  Eigen::LLT<MatrixXd> llt1(s1);
  if (llt1.info() != Eigen::Success) throw std::runtime_error("kl_divergence: singular covariance");
  const MatrixXd solved = llt1.solve(s0);
  const VectorXd d = mu1 - mu0;
  const double maha = d.dot(llt1.solve(d));
  double log_det1 = 0.0;
  for (int i = 0; i < n; ++i) log_det1 += 2.0 * std::log(llt1.matrixL()(i, i));
  const double log_det0 = log_det(s0, "kl_divergence");
  return 0.5 * (solved.trace() + maha - n + log_det1 - log_det0);
}

inline MatrixXd matrix_sqrt_psd(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Upper bound on the KL divergence between a mixture and the mixture with
/// the pair (a, b) merged:
///   B = 1/2 [ (w_a + w_b) log|S_m| - w_a log|S_a| - w_b log|S_b| ].
/// Computed on |w| so alpha-function components are comparable.
inline double kl_merge_bound(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("kl_merge_bound: dimension mismatch");
  const double wa = std::abs(a.weight());
  const double wb = std::abs(b.weight());
  if (!(wa > 0.0) || !(wb > 0.0)) throw std::invalid_argument("kl_merge_bound: zero weight");
  const GaussianComponent merged = moment_merge(a.with_weight(wa), b.with_weight(wb));
  return 0.5 * ((wa + wb) * detail::log_det(merged.covariance(), "kl_merge_bound") -
                wa * detail::log_det(a.covariance(), "kl_merge_bound") -
                wb * detail::log_det(b.covariance(), "kl_merge_bound"));
}

/// Weight-agnostic distance between the component densities. Zero iff the
/// densities are identical (euclidean: iff the means are identical).
inline double pair_distance(const GaussianComponent& a, const GaussianComponent& b, DistanceMetric metric) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("pair_distance: dimension mismatch");
  switch (metric) {
    case DistanceMetric::euclidean:
      return (a.mean() - b.mean()).norm();
    case DistanceMetric::sym_kl:
      return 0.5 * (detail::kl_divergence(a.mean(), a.covariance(), b.mean(), b.covariance()) +
                    detail::kl_divergence(b.mean(), b.covariance(), a.mean(), a.covariance()));
    case DistanceMetric::jsd: {
      // True JSD to the two-component mixture has no closed form; the
      // average is replaced by its moment-matched Gaussian.
      const VectorXd mu = 0.5 * (a.mean() + b.mean());
      const VectorXd d = a.mean() - b.mean();
      const MatrixXd cov = 0.5 * (a.covariance() + b.covariance()) + 0.25 * (d * d.transpose());
      return 0.5 * detail::kl_divergence(a.mean(), a.covariance(), mu, cov) +
             0.5 * detail::kl_divergence(b.mean(), b.covariance(), mu, cov);
    }
    case DistanceMetric::wasserstein2: {
      const MatrixXd root_b = detail::matrix_sqrt_psd(b.covariance());
      const MatrixXd inner = detail::matrix_sqrt_psd(root_b * a.covariance() * root_b);
      const double tr = (a.covariance() + b.covariance() - 2.0 * inner).trace();
      const double sq = (a.mean() - b.mean()).squaredNorm() + std::max(0.0, tr);
      return std::sqrt(sq);
    }
    case DistanceMetric::bhattacharyya: {
      const MatrixXd avg = 0.5 * (a.covariance() + b.covariance());
      Eigen::LLT<MatrixXd> llt(avg);
      if (llt.info() != Eigen::Success) throw std::runtime_error("pair_distance: singular covariance");
      const VectorXd d = a.mean() - b.mean();
      const double maha = d.dot(llt.solve(d));
      const double ld = detail::log_det(avg, "pair_distance") -
                        0.5 * (detail::log_det(a.covariance(), "pair_distance") +
                               detail::log_det(b.covariance(), "pair_distance"));
      return 0.125 * maha + 0.5 * ld;
    }
  }
  throw std::logic_error("unknown DistanceMetric");
}

namespace detail {

inline int weight_sign(double w) { return w < 0.0 ? -1 : 1; }

/// Greedy pairwise reduction of a component list in place. Pair selection
/// minimizes the Runnalls bound; only same-sign pairs are candidates so the
/// signed merge stays moment-preserving with a valid covariance. Ties go to
/// the lowest (i, j) index pair.
inline void runnalls_reduce(std::vector<GaussianComponent>& comps, int target) {
  const auto bound = [](const GaussianComponent& a, const GaussianComponent& b) {
    if (weight_sign(a.weight()) != weight_sign(b.weight())) return std::numeric_limits<double>::infinity();
    return kl_merge_bound(a, b);
  };
  const int n0 = static_cast<int>(comps.size());
  if (n0 <= target) return;
  // Triangular bound table, rebuilt incrementally after each merge.
  std::vector<std::vector<double>> b(n0);
  for (int i = 0; i < n0; ++i) {
    b[i].resize(n0, 0.0);
    for (int j = i + 1; j < n0; ++j) b[i][j] = bound(comps[i], comps[j]);
  }
  std::vector<int> alive(n0);
  std::iota(alive.begin(), alive.end(), 0);
  int remaining = n0;
  while (remaining > target) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (std::size_t p = 0; p < alive.size(); ++p) {
      for (std::size_t q = p + 1; q < alive.size(); ++q) {
        const double v = b[alive[p]][alive[q]];
        if (v < best) {
          best = v;
          bi = static_cast<int>(p);
          bj = static_cast<int>(q);
        }
      }
    }
    if (bi < 0 || !std::isfinite(best)) break;  // only opposite-sign pairs left
    const int ii = alive[bi];
    const int jj = alive[bj];
    comps[ii] = moment_merge(comps[ii], comps[jj]);
    alive.erase(alive.begin() + bj);
    --remaining;
    for (int other : alive) {
      if (other == ii) continue;
      const int lo = std::min(ii, other);
      const int hi = std::max(ii, other);
      b[lo][hi] = bound(comps[lo], comps[hi]);
    }
  }
  std::vector<GaussianComponent> out;
  out.reserve(alive.size());
  for (int i : alive) out.push_back(comps[i]);
  comps = std::move(out);
}

}  // namespace detail

/// Runnalls' condensation: merge the minimum-bound pair until the mixture
/// has at most `target` components. Total weight, weighted mean and second
/// moment are preserved. Identity when already small enough.
inline GaussianMixture runnalls(const GaussianMixture& mixture, int target) {
  if (target < 1) throw std::invalid_argument("runnalls: target must be >= 1");
  if (mixture.size() <= target) return mixture;
  std::vector<GaussianComponent> comps = mixture.components();
  detail::runnalls_reduce(comps, target);
  return {mixture.dimension(), mixture.kind(), std::move(comps)};
}

/// Lloyd-style K-means over the components with the chosen pairwise metric.
/// Centroids carry the arithmetic mean of member means and the |w|-averaged
/// member covariance (so the non-euclidean metrics stay well-defined).
/// Farthest-point seeding from the seed-selected first component makes the
/// partition deterministic; empty clusters are dropped.
inline std::vector<std::vector<int>> kmeans_cluster(const GaussianMixture& mixture, int k, DistanceMetric metric,
                                                    int max_iter, std::uint64_t seed) {
  const int n = mixture.size();
  if (k < 1) throw std::invalid_argument("kmeans_cluster: k must be >= 1");
  if (k > n) throw std::invalid_argument("kmeans_cluster: k exceeds mixture size");
  const auto& comps = mixture.components();

  std::vector<GaussianComponent> centroids;
  centroids.reserve(k);
  {
    SplitRng rng = SplitRng::keyed(seed, 0x6b6d65616e73ull);
    const int first = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
    centroids.push_back(comps[first].with_weight(1.0));
    std::vector<double> min_dist(n);
    for (int i = 0; i < n; ++i) min_dist[i] = pair_distance(comps[i], centroids[0], metric);
    while (static_cast<int>(centroids.size()) < k) {
      int far = 0;
      for (int i = 1; i < n; ++i)
        if (min_dist[i] > min_dist[far]) far = i;
      centroids.push_back(comps[far].with_weight(1.0));
      for (int i = 0; i < n; ++i) min_dist[i] = std::min(min_dist[i], pair_distance(comps[i], centroids.back(), metric));
    }
  }

  std::vector<int> assign(n, -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = pair_distance(comps[i], centroids[0], metric);
      for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
        const double d = pair_distance(comps[i], centroids[c], metric);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
      VectorXd mean = VectorXd::Zero(mixture.dimension());
      MatrixXd cov = MatrixXd::Zero(mixture.dimension(), mixture.dimension());
      double wsum = 0.0;
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (assign[i] != c) continue;
        mean += comps[i].mean();
        cov += std::abs(comps[i].weight()) * comps[i].covariance();
        wsum += std::abs(comps[i].weight());
        ++count;
      }
      if (count == 0) continue;  // empty cluster keeps its previous centroid
      mean /= count;
      cov = (wsum > 0.0) ? MatrixXd(cov / wsum) : comps[0].covariance();
      centroids[c] = GaussianComponent(1.0, mean, 0.5 * (cov + cov.transpose()));
    }
  }

  std::vector<std::vector<int>> clusters(k);
  for (int i = 0; i < n; ++i) clusters[assign[i]].push_back(i);
  clusters.erase(std::remove_if(clusters.begin(), clusters.end(), [](const auto& c) { return c.empty(); }),
                 clusters.end());
  return clusters;
}

/// Clustering-based hybrid condensation: pre-cluster, then run Runnalls
/// inside each cluster with a budget proportional to its share of the
/// mixands, psi = floor(h M-tilde / M) (at least 1). Budgets are trimmed,
/// largest first, if the minimums push the total past M-tilde, so the
/// output size always lands in [M-tilde - K, M-tilde]. Identity when the
/// input is already within budget.
inline GaussianMixture cluster_condense(const GaussianMixture& mixture, const CondenseConfig& config) {
  config.validate();
  const int m = mixture.size();
  if (m <= config.target_size) return mixture;
  const int k = std::min(config.cluster_count, m);
  const auto clusters = kmeans_cluster(mixture, k, config.metric, config.kmeans_max_iter, config.seed);

  std::vector<int> budget(clusters.size());
  int total = 0;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const int h = static_cast<int>(clusters[c].size());
    budget[c] = std::max(1, static_cast<int>(std::floor(static_cast<double>(h) * config.target_size / m)));
    budget[c] = std::min(budget[c], h);
    total += budget[c];
  }
  while (total > config.target_size) {
    int pick = -1;
    for (std::size_t c = 0; c < clusters.size(); ++c)
      if (budget[c] > 1 && (pick < 0 || budget[c] > budget[pick])) pick = static_cast<int>(c);
    if (pick < 0) break;
    --budget[pick];
    --total;
  }

  std::vector<GaussianComponent> out;
  out.reserve(config.target_size);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    std::vector<GaussianComponent> sub;
    sub.reserve(clusters[c].size());
    for (int i : clusters[c]) sub.push_back(mixture.components()[i]);
    detail::runnalls_reduce(sub, budget[c]);
    for (auto& comp : sub) out.push_back(std::move(comp));
  }
  return {mixture.dimension(), mixture.kind(), std::move(out)};
}

}  // namespace vbpomdp
