#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbpomdp/mixture.hpp"
#include "vbpomdp/softmax.hpp"

namespace vbpomdp {

/// lambda(xi) = tanh(xi/2) / (4 xi), continued by its limit 1/8 at xi = 0.
/// Even in xi, positive, monotone decreasing on xi > 0.
inline double lambda_of_xi(double xi) {
  const double a = std::abs(xi);
  if (a < 1e-8) return 0.125;
  return std::tanh(0.5 * a) / (4.0 * a);
}

/// Variational state of one Gaussian-times-softmax product: one xi per
/// softmax class plus the shared log-partition anchor alpha (the paper's
/// gamma plays the same role and is kept equal to it).
struct VariationalParams {
  VectorXd xi;
  double alpha_star = 0.0;
  double gamma = 0.0;
};

struct VBResult {
  GaussianComponent posterior;  // normalized, weight 1
  double log_mass;              // log C-hat
  int iterations;
  bool converged;
};

namespace detail {

inline double softplus(double x) {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double log_sigmoid(double x) { return -softplus(-x); }

struct QuadraticForm {
  double g;
  VectorXd h;
  MatrixXd k;
};

struct JointSolve {
  VectorXd mean;
  MatrixXd cov;
  double log_mass;
};

/// Integrates prior-density * exp{g + h's - 1/2 s'Ks}: completes the square
/// against the prior's canonical form.
inline JointSolve solve_joint(const VectorXd& mu, const MatrixXd& sigma, const QuadraticForm& q) {
  const int n = static_cast<int>(mu.size());
  Eigen::LLT<MatrixXd> prior_llt(sigma);
  if (prior_llt.info() != Eigen::Success) throw std::runtime_error("vb: prior covariance not positive definite");
  const MatrixXd prec = prior_llt.solve(MatrixXd::Identity(n, n));
  const VectorXd hp = prec * mu;
  double log_det_sigma = 0.0;
  for (int i = 0; i < n; ++i) log_det_sigma += 2.0 * std::log(prior_llt.matrixL()(i, i));
  const double gp = -0.5 * (n * std::log(2.0 * M_PI) + log_det_sigma + mu.dot(hp));

  MatrixXd ktot = prec + q.k;
  ktot = 0.5 * (ktot + ktot.transpose());
  Eigen::LLT<MatrixXd> ktot_llt(ktot);
  if (ktot_llt.info() != Eigen::Success)
    throw std::runtime_error("vb: non-positive-definite precision accumulation (degenerate softmax weights)");
  double log_det_ktot = 0.0;
  for (int i = 0; i < n; ++i) log_det_ktot += 2.0 * std::log(ktot_llt.matrixL()(i, i));

  JointSolve out;
  out.cov = ktot_llt.solve(MatrixXd::Identity(n, n));
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  const VectorXd h = hp + q.h;
  out.mean = out.cov * h;
  out.log_mass = gp + q.g + 0.5 * h.dot(out.mean) + 0.5 * (n * std::log(2.0 * M_PI) - log_det_ktot);
  return out;
}

/// Jaakkola-Jordan sigmoid bound for two-class models, written on the
/// activation difference z = (w_j - w_o)'s + (b_j - b_o):
///   sigma(z) >= sigma(xi) exp{(z - xi)/2 - lambda(xi)(z^2 - xi^2)}
/// with equality at z = +-xi, so the bound family is exact for binary
/// models (a constant likelihood is recovered without slack).
inline QuadraticForm binary_form(const VectorXd& d, double e, double xi) {
  const double lam = lambda_of_xi(xi);
  QuadraticForm q;
  q.k = 2.0 * lam * (d * d.transpose());
  q.h = (0.5 - 2.0 * lam * e) * d;
  q.g = log_sigmoid(xi) - 0.5 * xi + lam * (xi * xi - e * e) + 0.5 * e;
  return q;
}

/// Multiclass log-sum-exp bound: f(o=j, s) = exp{g_j + h_j's - 1/2 s'K_j s}
/// with
///   g_j = b_j - 1/2 sum_c b_c + alpha (N_o/2 - 1)
///         + sum_c [xi_c/2 + lambda_c (xi_c^2 - (b_c - alpha)^2) - log(1 + e^{xi_c})]
///   h_j = w_j - 1/2 sum_c w_c + 2 sum_c lambda_c (alpha - b_c) w_c
///   K_j = 2 sum_c lambda_c w_c w_c'
inline QuadraticForm multiclass_form(const SoftmaxModel& model, int j, const VariationalParams& p) {
  const int n = model.dimension();
  const int no = model.class_count();
  QuadraticForm q;
  q.k = MatrixXd::Zero(n, n);
  q.h = model.classes()[j].w;
  q.g = model.classes()[j].b + p.alpha_star * (0.5 * no - 1.0);
  for (int c = 0; c < no; ++c) {
    const auto& cl = model.classes()[c];
    const double xic = p.xi[c];
    const double lam = lambda_of_xi(xic);
    q.k += (2.0 * lam) * (cl.w * cl.w.transpose());
    q.h += (-0.5 + 2.0 * lam * (p.alpha_star - cl.b)) * cl.w;
    q.g += -0.5 * cl.b + 0.5 * xic + lam * (xic * xic - (cl.b - p.alpha_star) * (cl.b - p.alpha_star)) - softplus(xic);
  }
  return q;
}

}  // namespace detail

/// Tightest variational Gaussian lower bound of prior * p(class j | s).
///
/// Returns posterior and log C-hat with prior(s) * f(s) = C-hat * posterior(s)
/// and C-hat <= the true product mass; log C-hat is nondecreasing across the
/// EM iterations. Two-class models use the exact-touching sigmoid bound,
/// larger models the multiclass bound with the shared alpha parameter.
inline VBResult vb_gaussian_product(const GaussianComponent& prior, const SoftmaxModel& model, int class_index,
                                    double tol = 1e-6, int max_iter = 100,
                                    std::vector<double>* log_mass_trace = nullptr,
                                    VariationalParams* converged_params = nullptr) {
  if (!(prior.weight() > 0.0)) throw std::invalid_argument("vb_gaussian_product: prior weight must be positive");
  if (prior.dimension() != model.dimension()) throw std::invalid_argument("vb_gaussian_product: dimension mismatch");
  if (class_index < 0 || class_index >= model.class_count())
    throw std::invalid_argument("vb_gaussian_product: class index out of range");
  if (max_iter < 1) throw std::invalid_argument("vb_gaussian_product: max_iter must be >= 1");

  const VectorXd& mu = prior.mean();
  const MatrixXd& sigma = prior.covariance();
  const int no = model.class_count();
  const double log_prior_weight = std::log(prior.weight());

  VariationalParams params;
  params.xi = VectorXd::Zero(no);

  const bool binary = (no == 2);
  VectorXd d;
  double e = 0.0;
  if (binary) {
    const int other = 1 - class_index;
    d = model.classes()[class_index].w - model.classes()[other].w;
    e = model.classes()[class_index].b - model.classes()[other].b;
    const double xi0 = std::sqrt(std::max(0.0, (d.dot(mu) + e) * (d.dot(mu) + e) + d.dot(sigma * d)));
    params.xi.setConstant(xi0);
  } else {
    params.alpha_star = model.classes()[class_index].w.dot(mu) + model.classes()[class_index].b;
    for (int c = 0; c < no; ++c) {
      const auto& cl = model.classes()[c];
      const double m = cl.w.dot(mu) + cl.b - params.alpha_star;
      params.xi[c] = std::sqrt(std::max(0.0, m * m + cl.w.dot(sigma * cl.w)));
    }
  }
  params.gamma = params.alpha_star;

  double prev_log_mass = -std::numeric_limits<double>::infinity();
  double best_log_mass = -std::numeric_limits<double>::infinity();
  VectorXd best_mean = mu;
  MatrixXd best_cov = sigma;
  VariationalParams best_params = params;
  int iterations = 0;
  bool converged = false;

  for (int it = 1; it <= max_iter; ++it) {
    iterations = it;
    const detail::QuadraticForm q =
        binary ? detail::binary_form(d, e, params.xi[0]) : detail::multiclass_form(model, class_index, params);
    const detail::JointSolve js = detail::solve_joint(mu, sigma, q);
    if (log_mass_trace) log_mass_trace->push_back(js.log_mass + log_prior_weight);
    if (js.log_mass >= best_log_mass) {
      best_log_mass = js.log_mass;
      best_mean = js.mean;
      best_cov = js.cov;
      best_params = params;
    }
    if (it > 1 && std::abs(js.log_mass - prev_log_mass) < tol) {
      converged = true;
      break;
    }
    prev_log_mass = js.log_mass;

    if (binary) {
      const double m = d.dot(js.mean) + e;
      params.xi.setConstant(std::sqrt(std::max(0.0, m * m + d.dot(js.cov * d))));
    } else {
      for (int c = 0; c < no; ++c) {
        const auto& cl = model.classes()[c];
        const double m = cl.w.dot(js.mean) + cl.b - params.alpha_star;
        params.xi[c] = std::sqrt(std::max(0.0, m * m + cl.w.dot(js.cov * cl.w)));
      }
      double lam_sum = 0.0, lam_mean = 0.0;
      for (int c = 0; c < no; ++c) {
        const auto& cl = model.classes()[c];
        const double lam = lambda_of_xi(params.xi[c]);
        lam_sum += lam;
        lam_mean += lam * (cl.w.dot(js.mean) + cl.b);
      }
      if (lam_sum > 1e-12) params.alpha_star = ((0.5 * no - 1.0) + 2.0 * lam_mean) / (2.0 * lam_sum);
      params.gamma = params.alpha_star;
    }
  }

  if (converged_params) *converged_params = best_params;
  return {GaussianComponent(1.0, best_mean, best_cov), best_log_mass + log_prior_weight, iterations, converged};
}

/// Product of a mixture with one observation label's softmax likelihood.
/// Emits one component per (mixand, label class) in that order; weights are
/// w_k * C-hat with the mixand's sign carried through (the bound itself is
/// weight-independent). Output is unnormalized.
inline GaussianMixture vb_mixture_product(const GaussianMixture& mixture, const SoftmaxModel& model,
                                          const std::string& label, double tol = 1e-6, int max_iter = 100) {
  if (mixture.kind() == MixtureKind::likelihood)
    throw std::invalid_argument("vb_mixture_product: likelihood-kind input not supported");
  if (mixture.dimension() != model.dimension()) throw std::invalid_argument("vb_mixture_product: dimension mismatch");
  const auto& class_set = model.label_classes(label);
  std::vector<GaussianComponent> out;
  out.reserve(mixture.components().size() * class_set.size());
  for (const auto& comp : mixture.components()) {
    const GaussianComponent shape = comp.with_weight(1.0);
    for (int c : class_set) {
      const VBResult r = vb_gaussian_product(shape, model, c, tol, max_iter);
      out.emplace_back(comp.weight() * std::exp(r.log_mass), r.posterior.mean(), r.posterior.covariance());
    }
  }
  return {mixture.dimension(), MixtureKind::reward_or_alpha, std::move(out)};
}

}  // namespace vbpomdp
