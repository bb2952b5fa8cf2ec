#include <catch_amalgamated.hpp>

#include "support/oracles.hpp"
#include "vbpomdp/quadrature.hpp"
#include "vbpomdp/vb.hpp"

using namespace vbpomdp;
using Catch::Approx;

namespace {

GaussianComponent comp1d(double w, double mu, double var) {
  return {w, (VectorXd(1) << mu).finished(), (MatrixXd(1, 1) << var).finished()};
}

SoftmaxModel uniform_binary() {
  std::vector<SoftmaxClass> classes(2, SoftmaxClass{VectorXd::Zero(1), 0.0});
  return {1, classes, {{"a", {0}}, {"b", {1}}}};
}

SoftmaxModel binary_1d(double w0, double w1, double b0 = 0.0, double b1 = 0.0) {
  std::vector<SoftmaxClass> classes{{(VectorXd(1) << w0).finished(), b0}, {(VectorXd(1) << w1).finished(), b1}};
  return {1, classes, {{"a", {0}}, {"b", {1}}}};
}

SoftmaxModel random_model(SplitRng& rng, int dim, int n_classes) {
  std::vector<SoftmaxClass> classes(n_classes);
  std::map<std::string, std::vector<int>> labels;
  for (int c = 0; c < n_classes; ++c) {
    VectorXd w(dim);
    for (int i = 0; i < dim; ++i) w[i] = rng.uniform(-2.0, 2.0);
    classes[c] = {std::move(w), rng.uniform(-1.0, 1.0)};
    labels["label" + std::to_string(c)] = {c};
  }
  return {dim, std::move(classes), std::move(labels)};
}

/// Quadrature value of the true product mass, integral of prior * p(j|s).
double true_mass_1d(const GaussianComponent& prior, const SoftmaxModel& model, int j) {
  const double mu = prior.mean()[0];
  const double sd = std::sqrt(prior.covariance()(0, 0));
  return quadrature::integrate_1d(
      [&](double s) {
        VectorXd v(1);
        v << s;
        return prior.evaluate(v) * model.class_prob(v, j);
      },
      mu - 10 * sd, mu + 10 * sd, 128);
}

double true_mass_2d(const GaussianComponent& prior, const SoftmaxModel& model, int j) {
  const double sx = std::sqrt(prior.covariance()(0, 0));
  const double sy = std::sqrt(prior.covariance()(1, 1));
  return quadrature::integrate_2d(
      [&](double x, double y) {
        VectorXd v(2);
        v << x, y;
        return prior.evaluate(v) * model.class_prob(v, j);
      },
      prior.mean()[0] - 9 * sx, prior.mean()[0] + 9 * sx, prior.mean()[1] - 9 * sy, prior.mean()[1] + 9 * sy, 30);
}

}  // namespace

TEST_CASE("lambda_of_xi", "[vb]") {
  REQUIRE(lambda_of_xi(0.0) == Approx(0.125).epsilon(1e-14));
  REQUIRE(lambda_of_xi(2.0) == Approx(std::tanh(1.0) / 8.0).epsilon(1e-14));
  REQUIRE(lambda_of_xi(2.0) == Approx(0.0951992694944706).epsilon(1e-12));
  REQUIRE(lambda_of_xi(-3.7) == lambda_of_xi(3.7));
  double prev = lambda_of_xi(1e-6);
  for (double xi = 0.25; xi < 20.0; xi += 0.25) {
    const double cur = lambda_of_xi(xi);
    REQUIRE(cur < prev);
    REQUIRE(cur > 0.0);
    prev = cur;
  }
}

TEST_CASE("uniform binary softmax recovers the prior with mass one half", "[vb]") {
  const auto model = uniform_binary();
  const auto prior = comp1d(1.0, 0.7, 1.3);
  const auto r = vb_gaussian_product(prior, model, 0);
  REQUIRE(r.converged);
  REQUIRE(std::exp(r.log_mass) == Approx(0.5).margin(1e-9));
  REQUIRE(r.posterior.mean()[0] == Approx(0.7).margin(1e-9));
  REQUIRE(r.posterior.covariance()(0, 0) == Approx(1.3).margin(1e-9));
}

TEST_CASE("binary detect class pulls the posterior toward its side", "[vb]") {
  const auto model = binary_1d(1.0, -1.0);  // p(class 0 | s) = sigmoid(2 s)
  const auto prior = comp1d(1.0, 0.0, 1.0);
  const auto r0 = vb_gaussian_product(prior, model, 0);
  const double c_true = true_mass_1d(prior, model, 0);
  REQUIRE(c_true == Approx(0.5).margin(1e-9));  // odd integrand symmetry
  REQUIRE(std::exp(r0.log_mass) <= c_true + 1e-12);
  REQUIRE(r0.posterior.mean()[0] > 0.0);

  const auto r1 = vb_gaussian_product(prior, model, 1);
  REQUIRE(r1.posterior.mean()[0] == Approx(-r0.posterior.mean()[0]).margin(1e-9));
}

TEST_CASE("lower bound, EM monotonicity and consistency on random probes", "[vb][property]") {
  SplitRng rng(303);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = (trial % 2) + 1;
    const int n_classes = 2 + trial % 3;
    const auto model = random_model(rng, dim, n_classes);
    const auto prior = oracles::random_component(rng, dim, 2.0, 0.5, 1.5);
    const int j = trial % n_classes;

    std::vector<double> trace;
    const auto r = vb_gaussian_product(prior, model, j, 1e-6, 100, &trace);
    REQUIRE(std::isfinite(r.log_mass));
    for (std::size_t i = 1; i < trace.size(); ++i) REQUIRE(trace[i] >= trace[i - 1] - 1e-10);

    // f(s) = C-hat * posterior(s) / prior(s) must lower-bound the class
    // probability everywhere.
    for (int k = 0; k < 200; ++k) {
      VectorXd s(dim);
      for (int i = 0; i < dim; ++i) s[i] = prior.mean()[i] + rng.uniform(-4.0, 4.0);
      const double f = std::exp(r.log_mass) * r.posterior.density(s) / prior.evaluate(s);
      REQUIRE(f <= model.class_prob(s, j) + 1e-9);
    }

    // C-hat <= quadrature mass
    const double c_true = dim == 1 ? true_mass_1d(prior, model, j) : true_mass_2d(prior, model, j);
    REQUIRE(std::exp(r.log_mass) <= c_true + 1e-9);
    ++checked;
  }
  REQUIRE(checked == 100);
}

TEST_CASE("binary bound touches the true likelihood at the converged xi", "[vb]") {
  const auto model = binary_1d(1.5, -0.5, 0.3, -0.2);
  const auto prior = comp1d(1.0, 0.4, 0.8);
  VariationalParams params;
  const auto r = vb_gaussian_product(prior, model, 0, 1e-6, 100, nullptr, &params);
  // Activation difference z = d s + e; the bound touches the sigmoid where
  // z equals plus or minus the converged xi.
  const double d = 1.5 - (-0.5);
  const double e = 0.3 - (-0.2);
  const double xi = params.xi[0];
  for (double z : {xi, -xi}) {
    const double s = (z - e) / d;
    VectorXd v(1);
    v << s;
    const double f = std::exp(r.log_mass) * r.posterior.density(v) / prior.evaluate(v);
    REQUIRE(f == Approx(model.class_prob(v, 0)).epsilon(1e-9));
  }
}

TEST_CASE("error paths", "[vb]") {
  const auto model = uniform_binary();
  REQUIRE_THROWS_AS(vb_gaussian_product(comp1d(-1.0, 0, 1), model, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(vb_gaussian_product(comp1d(1.0, 0, 1), model, 5), std::invalid_argument);
  SECTION("max_iter exhaustion still returns the best iterate") {
    const auto m = binary_1d(3.0, -3.0);
    const auto r = vb_gaussian_product(comp1d(1.0, 2.0, 4.0), m, 0, 1e-16, 2);
    REQUIRE_FALSE(r.converged);
    REQUIRE(r.iterations == 2);
    REQUIRE(std::isfinite(r.log_mass));
  }
}

TEST_CASE("vb_mixture_product shapes and masses", "[vb]") {
  SECTION("two-component belief against a two-class MMS label gives four components") {
    std::vector<SoftmaxClass> classes(3);
    classes[0] = {(VectorXd(1) << 0.0).finished(), 1.0};
    classes[1] = {(VectorXd(1) << -2.0).finished(), 0.0};
    classes[2] = {(VectorXd(1) << 2.0).finished(), 0.0};
    const SoftmaxModel mms(1, classes, {{"Detect", {0}}, {"No Detect", {1, 2}}});
    const GaussianMixture belief(1, MixtureKind::belief, {comp1d(0.5, -1, 0.5), comp1d(0.5, 1, 0.5)});
    const auto out = vb_mixture_product(belief, mms, "No Detect");
    REQUIRE(out.size() == 4);
    REQUIRE(out.kind() == MixtureKind::reward_or_alpha);
  }
  SECTION("uniform two-class softmax halves the weight and keeps the shape") {
    const GaussianMixture m(1, MixtureKind::reward_or_alpha, {comp1d(0.8, 1.2, 0.9)});
    const auto out = vb_mixture_product(m, uniform_binary(), "a");
    REQUIRE(out.size() == 1);
    REQUIRE(out.components()[0].weight() == Approx(0.4).margin(1e-9));
    REQUIRE(out.components()[0].mean()[0] == Approx(1.2).margin(1e-9));
    REQUIRE(out.components()[0].covariance()(0, 0) == Approx(0.9).margin(1e-9));
  }
  SECTION("negative weights pass through as sign") {
    const GaussianMixture m(1, MixtureKind::reward_or_alpha, {comp1d(-0.8, 1.2, 0.9)});
    const auto out = vb_mixture_product(m, uniform_binary(), "a");
    REQUIRE(out.components()[0].weight() == Approx(-0.4).margin(1e-9));
  }
  SECTION("total mass lower-bounds the quadrature mass on random cases") {
    SplitRng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
      const auto model = random_model(rng, 1, 2 + trial % 2);
      const auto mix = oracles::random_belief(rng, 1, 2);
      const auto label = model.label_names()[trial % model.label_names().size()];
      const auto out = vb_mixture_product(mix, model, label);
      const auto [lo, hi] = quadrature::support_box(mix);
      const double quad = quadrature::integrate_1d(
          [&](double s) {
            VectorXd v(1);
            v << s;
            return mix.evaluate(v) * model.label_prob(v, label);
          },
          lo[0], hi[0], 128);
      REQUIRE(out.total_weight() <= quad + 1e-12);
    }
  }
  SECTION("likelihood-kind input rejected") {
    const GaussianMixture lk(1, MixtureKind::likelihood, {comp1d(2.0, 0, 1)});
    REQUIRE_THROWS_AS(vb_mixture_product(lk, uniform_binary(), "a"), std::invalid_argument);
  }
}
