#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vbpomdp/mixture.hpp"

namespace vbpomdp {

/// Composite Gauss-Legendre quadrature, 1D and tensor-product 2D. Used as
/// an independent verification route for the closed-form mixture algebra
/// and the variational bounds; it never calls back into them.
namespace quadrature {

struct Rule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline Rule legendre_rule(int order) {
  if (order < 1) throw std::invalid_argument("legendre_rule: order must be >= 1");
  Rule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[order - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[i] = w;
    r.weights[order - 1 - i] = w;
  }
  return r;
}

inline const Rule& rule20() {
  static const Rule r = legendre_rule(20);
  return r;
}

inline double integrate_1d(const std::function<double(double)>& f, double lo, double hi, int panels = 64) {
  if (!(hi > lo)) throw std::invalid_argument("integrate_1d: empty interval");
  const Rule& r = rule20();
  const double h = (hi - lo) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    const double mid = a + 0.5 * h;
    double panel = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) panel += r.weights[i] * f(mid + 0.5 * h * r.nodes[i]);
    acc += 0.5 * h * panel;
  }
  return acc;
}

/// Panel-doubling refinement until successive estimates agree.
inline double integrate_1d_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    double rel_tol = 1e-10, int max_panels = 1024) {
  int panels = 32;
  double prev = integrate_1d(f, lo, hi, panels);
  while (panels < max_panels) {
    panels *= 2;
    const double cur = integrate_1d(f, lo, hi, panels);
    if (std::abs(cur - prev) <= rel_tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

inline double integrate_2d(const std::function<double(double, double)>& f, double lox, double hix,
                           double loy, double hiy, int panels = 24) {
  const Rule& r = rule20();
  const double hx = (hix - lox) / panels;
  const double hy = (hiy - loy) / panels;
  double acc = 0.0;
  for (int px = 0; px < panels; ++px) {
    const double midx = lox + (px + 0.5) * hx;
    for (int py = 0; py < panels; ++py) {
      const double midy = loy + (py + 0.5) * hy;
      double panel = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double x = midx + 0.5 * hx * r.nodes[i];
        double row = 0.0;
        for (std::size_t j = 0; j < r.nodes.size(); ++j) row += r.weights[j] * f(x, midy + 0.5 * hy * r.nodes[j]);
        panel += r.weights[i] * row;
      }
      acc += 0.25 * hx * hy * panel;
    }
  }
  return acc;
}

/// [min(mu - 8 sigma), max(mu + 8 sigma)] per axis over all components.
inline std::pair<VectorXd, VectorXd> support_box(const GaussianMixture& m, double sigmas = 8.0) {
  if (m.empty()) throw std::invalid_argument("support_box: empty mixture");
  const int n = m.dimension();
  VectorXd lo = VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  VectorXd hi = VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  for (const auto& c : m.components()) {
    for (int i = 0; i < n; ++i) {
      const double s = std::sqrt(c.covariance()(i, i));
      lo[i] = std::min(lo[i], c.mean()[i] - sigmas * s);
      hi[i] = std::max(hi[i], c.mean()[i] + sigmas * s);
    }
  }
  return {lo, hi};
}

/// Integrates a scalar function of the state over the mixture's support box.
/// Dimension 1 or 2 only.
inline double integrate_over_support(const GaussianMixture& m, const std::function<double(const VectorXd&)>& f,
                                     double sigmas = 8.0, int panels_1d = 96, int panels_2d = 28) {
  const auto [lo, hi] = support_box(m, sigmas);
  if (m.dimension() == 1) {
    return integrate_1d([&](double x) { VectorXd v(1); v << x; return f(v); }, lo[0], hi[0], panels_1d);
  }
  if (m.dimension() == 2) {
    return integrate_2d([&](double x, double y) { VectorXd v(2); v << x, y; return f(v); },
                        lo[0], hi[0], lo[1], hi[1], panels_2d);
  }
  throw std::invalid_argument("integrate_over_support: only 1D and 2D supported");
}

}  // namespace quadrature
}  // namespace vbpomdp
