#include <catch_amalgamated.hpp>

#include "vbpomdp/model.hpp"
#include "vbpomdp/scenarios.hpp"

using namespace vbpomdp;
using Catch::Approx;

namespace {

CPOMDPModel tiny_model(std::optional<MatrixXd> stm = std::nullopt, double discount = 0.9) {
  std::vector<SoftmaxClass> classes{{(VectorXd(1) << 1.0).finished(), 0.0},
                                    {(VectorXd(1) << -1.0).finished(), 0.0}};
  SoftmaxModel obs(1, classes, {{"hit", {0}}, {"miss", {1}}});
  std::vector<ActionModel> actions{{"go", (VectorXd(1) << 0.5).finished(), (MatrixXd(1, 1) << 0.1).finished()}};
  GaussianMixture reward(1, MixtureKind::reward_or_alpha,
                         {GaussianComponent(1.0, VectorXd::Zero(1), MatrixXd::Identity(1, 1))});
  return {1, actions, std::move(stm), {{"go", reward}}, obs, discount};
}

}  // namespace

TEST_CASE("model validation", "[model]") {
  REQUIRE_NOTHROW(tiny_model());
  REQUIRE_NOTHROW(tiny_model(std::nullopt, 0.0));  // zero discount is legal
  REQUIRE_THROWS_AS(tiny_model(std::nullopt, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(tiny_model(MatrixXd::Zero(1, 1)), std::invalid_argument);  // singular F
  REQUIRE_NOTHROW(tiny_model(MatrixXd::Identity(1, 1)));
}

TEST_CASE("model accessors", "[model]") {
  const auto m = tiny_model();
  REQUIRE(m.action("go").delta[0] == Approx(0.5));
  REQUIRE_THROWS_AS(m.action("missing"), std::invalid_argument);
  REQUIRE_THROWS_AS(m.reward("missing"), std::invalid_argument);
  REQUIRE(m.labels() == std::vector<std::string>{"hit", "miss"});
  REQUIRE(m.softmax_mode());
}

TEST_CASE("label probabilities normalize in both observation modes", "[model]") {
  const auto softmax_model = tiny_model();
  const auto p = softmax_model.label_probabilities((VectorXd(1) << 0.3).finished());
  REQUIRE(p.size() == 2);
  REQUIRE(p[0] + p[1] == Approx(1.0).epsilon(1e-12));

  const auto colinear = scenarios::colinear();
  REQUIRE(colinear.gm_model.has_value());
  const auto q = colinear.gm_model->label_probabilities((VectorXd(2) << 2.5, 2.6).finished());
  REQUIRE(q[0] + q[1] == Approx(1.0).epsilon(1e-12));
  REQUIRE_FALSE(colinear.gm_model->softmax_mode());
}

TEST_CASE("built-in scenarios match their published parameters", "[model][scenarios]") {
  SECTION("colinear") {
    const auto s = scenarios::colinear();
    REQUIRE(s.model.dimension() == 2);
    REQUIRE(s.model.actions().size() == 3);
    REQUIRE(s.model.discount() == Approx(0.95));
    REQUIRE(s.model.softmax().class_count() == 3);     // 9-parameter MMS detector
    REQUIRE(s.model.labels().size() == 2);
    REQUIRE(s.model.action("left").delta[0] == Approx(-0.5));
    REQUIRE(s.model.action("right").delta[0] == Approx(0.5));
    REQUIRE(s.model.action("left").noise(1, 1) == Approx(0.5));  // robber walk variance
    REQUIRE(s.reward_rule.radius == Approx(0.5));
    REQUIRE(s.reward_rule.payoff == Approx(3.0));
    REQUIRE(s.reward_rule.penalty == Approx(-1.0));
  }
  SECTION("search2d") {
    const auto s = scenarios::search2d();
    REQUIRE(s.model.dimension() == 2);
    REQUIRE(s.model.actions().size() == 5);
    REQUIRE(s.model.labels().size() == 5);
    REQUIRE(s.reward_rule.payoff == Approx(5.0));
    REQUIRE(s.reward_rule.penalty == Approx(0.0));
    // difference-state: cop moves enter negated
    REQUIRE(s.model.action("East").delta[0] == Approx(-1.0));
    REQUIRE(s.cop_actions.at("East").move[0] == Approx(1.0));
  }
  SECTION("ncv4d uses the unit-step NCV block transition") {
    const auto s = scenarios::ncv4d();
    REQUIRE(s.model.dimension() == 4);
    REQUIRE(s.model.stm().has_value());
    MatrixXd expect = MatrixXd::Identity(4, 4);
    expect(0, 2) = 1.0;
    expect(1, 3) = 1.0;
    REQUIRE(s.model.stm()->isApprox(expect));
  }
  SECTION("mms variant has a capture rule and a 2-label MMS sensor") {
    const auto s = scenarios::search2d_mms();
    REQUIRE(s.capture_rule.has_value());
    REQUIRE(s.capture_rule->radius == Approx(1.0));
    REQUIRE(s.model.labels().size() == 2);
    REQUIRE(s.model.softmax().label_classes("No Detect").size() == 4);
  }
}

TEST_CASE("colinear reward band approximates the +3/-1 proximity rule", "[model][scenarios]") {
  const auto s = scenarios::colinear();
  const auto& r = s.model.reward("stay");
  const auto at = [&](double cop, double rob) { return r.evaluate((VectorXd(2) << cop, rob).finished()); };
  // on the diagonal interior: close to the +3 payoff
  for (double x : {1.5, 2.5, 3.5}) REQUIRE(at(x, x) == Approx(3.0).margin(0.35));
  // at the band edge |rob - cop| = 0.5: halfway between payoff and penalty
  REQUIRE(at(2.25, 2.75) == Approx(1.0).margin(0.35));
  // far off the diagonal: the -1 penalty
  REQUIRE(at(1.0, 4.0) == Approx(-1.0).margin(0.15));
}

TEST_CASE("colinear GM likelihoods track the softmax sensor", "[model][scenarios]") {
  const auto s = scenarios::colinear();
  const auto& softmax = s.model.softmax();
  const auto& gm = s.gm_model->gm_observation();
  double worst_ratio_err = 0.0, worst_sum_err = 0.0;
  for (double cop = 1.0; cop <= 4.0; cop += 0.5) {
    for (double rob = 1.0; rob <= 4.0; rob += 0.5) {
      const VectorXd st = (VectorXd(2) << cop, rob).finished();
      const double det = gm.at("Detect").evaluate(st);
      const double nodet = gm.at("No Detect").evaluate(st);
      worst_sum_err = std::max(worst_sum_err, std::abs(det + nodet - 1.0));
      const double gm_ratio = det / (det + nodet);
      worst_ratio_err = std::max(worst_ratio_err, std::abs(gm_ratio - softmax.label_prob(st, "Detect")));
    }
  }
  INFO("worst normalized detect error " << worst_ratio_err << ", worst sum deviation " << worst_sum_err);
  REQUIRE(worst_ratio_err <= 0.06);
  REQUIRE(worst_sum_err <= 0.20);
}
