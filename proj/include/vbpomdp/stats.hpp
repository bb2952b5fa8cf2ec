#pragma once

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <span>
#include <stdexcept>

namespace vbpomdp {

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom; two-sided p-value from the Student-t distribution.
inline TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_ttest: need at least two samples per group");
  double ma = 0.0, mb = 0.0;
  for (double x : a) ma += x;
  for (double x : b) mb += x;
  ma /= na;
  mb /= nb;
  double va = 0.0, vb = 0.0;
  for (double x : a) va += (x - ma) * (x - ma);
  for (double x : b) vb += (x - mb) * (x - mb);
  va /= (na - 1.0);
  vb /= (nb - 1.0);
  const double sa = va / na;
  const double sb = vb / nb;
  if (!(sa + sb > 0.0)) throw std::invalid_argument("welch_ttest: both samples are degenerate");

  TTestResult r;
  r.t = (ma - mb) / std::sqrt(sa + sb);
  const double denom = sa * sa / (na - 1.0) + sb * sb / (nb - 1.0);
  r.df = denom > 0.0 ? (sa + sb) * (sa + sb) / denom : na + nb - 2.0;
  if (r.t == 0.0) {
    r.p = 1.0;
    return r;
  }
  const boost::math::students_t dist(r.df);
  r.p = 2.0 * boost::math::cdf(dist, -std::abs(r.t));
  return r;
}

struct ProportionTestResult {
  double z = 0.0;
  double p = 1.0;
};

/// Two-proportion pooled z-test (binomial comparison of capture rates).
inline ProportionTestResult binomial_two_sample_test(int successes_a, int n_a, int successes_b, int n_b) {
  if (n_a <= 0 || n_b <= 0) throw std::invalid_argument("binomial_two_sample_test: empty sample");
  if (successes_a < 0 || successes_a > n_a || successes_b < 0 || successes_b > n_b)
    throw std::invalid_argument("binomial_two_sample_test: success count out of range");
  const double pa = static_cast<double>(successes_a) / n_a;
  const double pb = static_cast<double>(successes_b) / n_b;
  const double pooled = static_cast<double>(successes_a + successes_b) / (n_a + n_b);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b));
  ProportionTestResult r;
  if (!(se > 0.0)) return r;  // identical degenerate proportions
  r.z = (pa - pb) / se;
  const boost::math::normal dist;
  r.p = 2.0 * boost::math::cdf(dist, -std::abs(r.z));
  return r;
}

}  // namespace vbpomdp
