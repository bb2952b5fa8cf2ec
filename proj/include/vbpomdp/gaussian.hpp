#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace vbpomdp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace detail {

inline void check_square(const MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": matrix not square");
}

inline Eigen::VectorXd symmetric_eigenvalues(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  if (m.rows() <= 3) {
    es.computeDirect(m, Eigen::EigenvaluesOnly);
  } else {
    es.compute(m, Eigen::EigenvaluesOnly);
  }
  return es.eigenvalues();
}

}  // namespace detail

/// log N(x | mean, cov). cov must be symmetric positive definite.
inline double gaussian_log_density(const VectorXd& mean, const MatrixXd& cov, const VectorXd& x) {
  const auto n = mean.size();
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("gaussian_log_density: covariance not positive definite");
  const VectorXd r = llt.matrixL().solve(x - mean);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + log_det + r.squaredNorm());
}

inline double gaussian_density(const VectorXd& mean, const MatrixXd& cov, const VectorXd& x) {
  return std::exp(gaussian_log_density(mean, cov, x));
}

/// One weighted multivariate normal term of a mixture.
///
/// The weight may take any sign (alpha functions carry negative mass); the
/// covariance is validated once at construction: symmetric within
/// 1e-10*max|entry| and eigenvalues above 1e-12*trace. Near-singular
/// covariances are rejected, not regularized. Instances are immutable.
class GaussianComponent {
 public:
  GaussianComponent(double weight, VectorXd mean, MatrixXd cov)
      : weight_(weight), mean_(std::move(mean)), cov_(std::move(cov)) {
    detail::check_square(cov_, "GaussianComponent");
    if (mean_.size() != cov_.rows()) throw std::invalid_argument("GaussianComponent: mean/covariance dimension mismatch");
    if (mean_.size() == 0) throw std::invalid_argument("GaussianComponent: empty dimension");
    const double scale = cov_.cwiseAbs().maxCoeff();
    const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) throw std::invalid_argument("GaussianComponent: covariance not symmetric");
    const double trace = cov_.trace();
    if (!(trace > 0.0)) throw std::invalid_argument("GaussianComponent: covariance has nonpositive trace");
    const VectorXd evals = detail::symmetric_eigenvalues(cov_);
    if (evals.minCoeff() <= 1e-12 * trace) throw std::invalid_argument("GaussianComponent: covariance not positive definite");
  }

  double weight() const { return weight_; }
  const VectorXd& mean() const { return mean_; }
  const MatrixXd& covariance() const { return cov_; }
  int dimension() const { return static_cast<int>(mean_.size()); }

  /// Unweighted density phi(x | mean, cov).
  double density(const VectorXd& x) const { return gaussian_density(mean_, cov_, x); }

  /// weight * phi(x | mean, cov).
  double evaluate(const VectorXd& x) const { return weight_ * density(x); }

  GaussianComponent scaled(double factor) const { return {weight_ * factor, mean_, cov_}; }
  GaussianComponent with_weight(double w) const { return {w, mean_, cov_}; }

 private:
  double weight_;
  VectorXd mean_;
  MatrixXd cov_;
};

/// Pointwise product of two Gaussian functions, itself an unnormalized
/// Gaussian: weight w_a*w_b*phi(mu_b | mu_a, S_a+S_b), covariance
/// (S_a^-1 + S_b^-1)^-1 and the matching precision-weighted mean.
inline GaussianComponent gaussian_product(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("gaussian_product: dimension mismatch");
  const MatrixXd sum = a.covariance() + b.covariance();
  Eigen::LLT<MatrixXd> llt_sum(sum);
  if (llt_sum.info() != Eigen::Success) throw std::runtime_error("gaussian_product: singular covariance sum");
  const double w = a.weight() * b.weight() * gaussian_density(a.mean(), sum, b.mean());

  const MatrixXd pa = a.covariance().llt().solve(MatrixXd::Identity(a.dimension(), a.dimension()));
  const MatrixXd pb = b.covariance().llt().solve(MatrixXd::Identity(b.dimension(), b.dimension()));
  MatrixXd prec = pa + pb;
  MatrixXd cov = prec.llt().solve(MatrixXd::Identity(a.dimension(), a.dimension()));
  cov = 0.5 * (cov + cov.transpose());
  const VectorXd mean = cov * (pa * a.mean() + pb * b.mean());
  return {w, mean, cov};
}

/// Moment-preserving pairwise merge: keeps total mass, mean and second
/// moment of the pair. The cross term is normalized by w_m^2 (Runnalls'
/// form); the w_m variant found in some write-ups does not preserve the
/// second moment.
inline GaussianComponent moment_merge(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("moment_merge: dimension mismatch");
  const double wm = a.weight() + b.weight();
  if (wm == 0.0) throw std::invalid_argument("moment_merge: zero total weight");
  const double fa = a.weight() / wm;
  const double fb = b.weight() / wm;
  const VectorXd mean = fa * a.mean() + fb * b.mean();
  const VectorXd d = a.mean() - b.mean();
  MatrixXd cov = fa * a.covariance() + fb * b.covariance() + (fa * fb) * (d * d.transpose());
  cov = 0.5 * (cov + cov.transpose());
  return {wm, mean, cov};
}

/// Rewrites phi(F s | mu, S) as (1/omega) phi(s | F^-1 mu, F^-1 S F^-T)
/// with omega = |F^-1 F^-T|^(-1/2) = |det F|. The component's weight is
/// divided by omega.
inline GaussianComponent lti_transform(const GaussianComponent& c, const MatrixXd& stm) {
  detail::check_square(stm, "lti_transform");
  if (stm.rows() != c.dimension()) throw std::invalid_argument("lti_transform: matrix dimension mismatch");
  Eigen::FullPivLU<MatrixXd> lu(stm);
  if (!lu.isInvertible() || std::abs(lu.determinant()) <= 1e-12)
    throw std::invalid_argument("lti_transform: singular state-transition matrix");
  const MatrixXd inv = lu.inverse();
  const double omega = std::abs(lu.determinant());
  const VectorXd mean = inv * c.mean();
  MatrixXd cov = inv * c.covariance() * inv.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return {c.weight() / omega, mean, cov};
}

}  // namespace vbpomdp
