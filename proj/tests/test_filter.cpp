#include <catch_amalgamated.hpp>

#include "support/oracles.hpp"
#include "vbpomdp/filter.hpp"
#include "vbpomdp/quadrature.hpp"
#include "vbpomdp/scenarios.hpp"

using namespace vbpomdp;
using Catch::Approx;

namespace {

CPOMDPModel model_1d(SoftmaxModel obs) {
  std::vector<ActionModel> actions{{"noop", VectorXd::Zero(1), (MatrixXd(1, 1) << 0.01).finished()}};
  GaussianMixture reward(1, MixtureKind::reward_or_alpha,
                         {GaussianComponent(1.0, VectorXd::Zero(1), MatrixXd::Identity(1, 1))});
  return {1, actions, std::nullopt, {{"noop", reward}}, std::move(obs), 0.9};
}

SoftmaxModel uniform_binary_1d() {
  std::vector<SoftmaxClass> classes(2, SoftmaxClass{VectorXd::Zero(1), 0.0});
  return {1, classes, {{"a", {0}}, {"b", {1}}}};
}

SoftmaxModel detect_mms_1d(double steep = 3.0, double radius = 1.0) {
  std::vector<SoftmaxClass> classes(3);
  classes[0] = {VectorXd::Zero(1), std::log(2.0 * std::cosh(steep * radius))};
  classes[1] = {(VectorXd(1) << -steep).finished(), 0.0};
  classes[2] = {(VectorXd(1) << steep).finished(), 0.0};
  return {1, std::move(classes), {{"Detect", {0}}, {"No Detect", {1, 2}}}};
}

GaussianMixture belief_1d(double mean, double var) {
  return {1, MixtureKind::belief,
          {GaussianComponent(1.0, (VectorXd(1) << mean).finished(), (MatrixXd(1, 1) << var).finished())}};
}

}  // namespace

TEST_CASE("predict", "[filter]") {
  SECTION("random-walk model inflates covariance, keeps means and mass") {
    const auto model = model_1d(uniform_binary_1d());
    const auto b = belief_1d(0.4, 1.0);
    const auto p = predict(b, model, "noop");
    REQUIRE(p.size() == 1);
    REQUIRE(p.components()[0].mean()[0] == Approx(0.4));
    REQUIRE(p.components()[0].covariance()(0, 0) == Approx(1.01));
    REQUIRE(p.total_weight() == Approx(1.0));
  }
  SECTION("NCV state-transition matrix moves position by velocity") {
    const auto s = scenarios::ncv4d();
    GaussianMixture b(4, MixtureKind::belief,
                      {GaussianComponent(1.0, (VectorXd(4) << 0, 0, 1, 0).finished(), MatrixXd::Identity(4, 4))});
    const auto p = predict(b, s.model, "Stay");
    REQUIRE(p.components()[0].mean()[0] == Approx(1.0));
    REQUIRE(p.components()[0].mean()[1] == Approx(0.0));
    REQUIRE(p.components()[0].mean()[2] == Approx(1.0));
  }
}

TEST_CASE("update with a constant likelihood returns the prior", "[filter]") {
  const auto model = model_1d(uniform_binary_1d());
  SplitRng rng(21);
  const auto b = oracles::random_belief(rng, 1, 3);
  FilterConfig cfg;
  const auto posterior = update(b, model, "a", cfg);
  REQUIRE(posterior.size() == b.size());
  REQUIRE(posterior.total_weight() == Approx(1.0).margin(1e-9));
  for (int i = 0; i < b.size(); ++i) {
    REQUIRE(posterior.components()[i].weight() == Approx(b.components()[i].weight()).margin(1e-9));
    REQUIRE(posterior.components()[i].mean().isApprox(b.components()[i].mean(), 1e-9));
  }
}

TEST_CASE("no-detect MMS update splits a unimodal prior into a bimodal posterior", "[filter]") {
  const auto model = model_1d(detect_mms_1d());
  const auto prior = belief_1d(0.0, 4.0);
  FilterConfig cfg;
  const auto posterior = update(prior, model, "No Detect", cfg);
  REQUIRE(posterior.size() <= 2 * prior.size());
  // count local maxima of the posterior density on a grid
  int maxima = 0;
  double prev = 0.0, cur = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.05) {
    const double next = posterior.evaluate((VectorXd(1) << x).finished());
    if (cur > prev && cur > next) ++maxima;
    prev = cur;
    cur = next;
  }
  REQUIRE(maxima == 2);
}

TEST_CASE("detect update shifts the posterior mean toward the detect side", "[filter]") {
  std::vector<SoftmaxClass> classes{{(VectorXd(1) << 0.6).finished(), 0.0},
                                    {(VectorXd(1) << -0.6).finished(), 0.0}};
  const SoftmaxModel obs(1, classes, {{"hit", {0}}, {"miss", {1}}});
  const auto model = model_1d(obs);
  const auto prior = belief_1d(0.2, 1.0);
  FilterConfig cfg;
  const auto posterior = update(prior, model, "hit", cfg);

  const double quad_mass = quadrature::integrate_1d(
      [&](double s) {
        VectorXd v(1);
        v << s;
        return prior.evaluate(v) * obs.label_prob(v, "hit");
      },
      -10, 10, 128);
  const double quad_mean = quadrature::integrate_1d(
                               [&](double s) {
                                 VectorXd v(1);
                                 v << s;
                                 return s * prior.evaluate(v) * obs.label_prob(v, "hit");
                               },
                               -10, 10, 128) /
                           quad_mass;
  const double post_mean = posterior.weighted_mean()[0];
  REQUIRE(post_mean > 0.2);
  REQUIRE(post_mean == Approx(quad_mean).epsilon(0.05));
}

TEST_CASE("update output is always a condensed normalized belief", "[filter]") {
  const auto colinear = scenarios::colinear();
  FilterConfig cfg;
  cfg.condense.target_size = 6;
  GaussianMixture b = colinear.initial_belief;
  for (const char* label : {"No Detect", "No Detect", "Detect", "No Detect"}) {
    b = update(predict(b, colinear.model, "right"), colinear.model, label, cfg);
    REQUIRE(b.kind() == MixtureKind::belief);
    REQUIRE(b.total_weight() == Approx(1.0).margin(1e-9));
    REQUIRE(b.size() <= 6);
  }
}

TEST_CASE("gm-likelihood update matches quadrature before condensation", "[filter]") {
  const auto colinear = scenarios::colinear();
  const auto& gm_model = *colinear.gm_model;
  FilterConfig cfg;
  cfg.condense.target_size = 200;  // effectively no condensation
  GaussianMixture prior(2, MixtureKind::belief,
                        {GaussianComponent(1.0, (VectorXd(2) << 2.5, 2.7).finished(),
                                           (MatrixXd(2, 2) << 0.2, 0, 0, 0.2).finished())});
  const auto posterior = update(prior, gm_model, "Detect", cfg);
  const auto& lk = gm_model.gm_observation().at("Detect");
  const double mass = oracles::product_integral(prior, lk);
  // sampled-point check of the normalized posterior density
  SplitRng rng(77);
  for (int i = 0; i < 20; ++i) {
    VectorXd s(2);
    s << rng.uniform(1.5, 3.5), rng.uniform(1.5, 3.5);
    const double expected = prior.evaluate(s) * lk.evaluate(s) / mass;
    REQUIRE(posterior.evaluate(s) == Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("contradictory observation signals zero posterior mass", "[filter]") {
  // Likelihood mass far away from the whole belief support.
  GMObservation obs;
  obs.emplace("far", GaussianMixture(1, MixtureKind::likelihood,
                                     {GaussianComponent(1.0, (VectorXd(1) << 4000.0).finished(),
                                                        (MatrixXd(1, 1) << 0.5).finished())}));
  obs.emplace("near", GaussianMixture(1, MixtureKind::likelihood,
                                      {GaussianComponent(1.0, VectorXd::Zero(1), (MatrixXd(1, 1) << 0.5).finished())}));
  std::vector<ActionModel> actions{{"noop", VectorXd::Zero(1), (MatrixXd(1, 1) << 0.01).finished()}};
  GaussianMixture reward(1, MixtureKind::reward_or_alpha,
                         {GaussianComponent(1.0, VectorXd::Zero(1), MatrixXd::Identity(1, 1))});
  const CPOMDPModel model(1, actions, std::nullopt, {{"noop", reward}}, obs, 0.9);
  FilterConfig cfg;
  REQUIRE_THROWS_AS(update(belief_1d(0.0, 1.0), model, "far", cfg), zero_mass_error);
  REQUIRE_NOTHROW(update(belief_1d(0.0, 1.0), model, "near", cfg));
}
