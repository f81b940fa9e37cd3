#include <cmath>
#include <fstream>

#include "doctest.h"

#include "superhedge/errors.hpp"
#include "superhedge/model.hpp"

using namespace superhedge;

TEST_CASE("move space splits and orders moves") {
  MoveSpace m = MoveSpace::parse("2,-1,1,-3/2");
  REQUIRE(m.size() == 4);
  CHECK(m.moves().front() == Rational(-3, 2));
  CHECK(m.moves().back() == Rational(2));
  CHECK(m.negatives() == std::vector<Rational>{Rational(-1), Rational(-3, 2)});
  CHECK(m.positives() == std::vector<Rational>{Rational(1), Rational(2)});
  CHECK(m.index_of_negative(0) == 1);
  CHECK(m.index_of_positive(0) == 2);
  CHECK(m.denominator() == 2);
  CHECK(m.lattice_units() == std::vector<std::int64_t>{-3, -2, 2, 4});
  CHECK(m.pair_count() == 4);
  CHECK(m.to_string() == "-3/2,-1,1,2");
}

TEST_CASE("move space rejects degenerate input") {
  CHECK_THROWS_AS(MoveSpace::parse("1,2"), ValidationError);
  CHECK_THROWS_AS(MoveSpace::parse("-1,-2"), ValidationError);
  CHECK_THROWS_AS(MoveSpace::parse("-1,1,1"), ValidationError);
  CHECK_THROWS_AS(MoveSpace::parse("-1,x"), ValidationError);
  CHECK_NOTHROW(MoveSpace::parse("-1,0"));
}

TEST_CASE("move space subsets") {
  MoveSpace tri = MoveSpace::parse("-1,1,2");
  MoveSpace quad = MoveSpace::parse("-1,1,2,5/2");
  CHECK(tri.is_subset_of(quad));
  CHECK_FALSE(quad.is_subset_of(tri));
  CHECK(quad.contains(Rational(5, 2)));
  CHECK_FALSE(tri.contains(Rational(0)));
}

TEST_CASE("variances") {
  auto v = variances(MoveSpace::parse("-1,1,2"));
  CHECK(v.sigma_min_sq == 1.0);
  CHECK(v.sigma_max_sq == 2.0);
  v = variances(MoveSpace::parse("-1,0,1"));
  CHECK(v.sigma_min_sq == 0.0);
  CHECK(v.sigma_max_sq == 1.0);
  v = variances(MoveSpace::parse("-2,-1,1,3"));
  CHECK(v.sigma_min_sq == 1.0);
  CHECK(v.sigma_max_sq == 6.0);
  auto exact = MoveSpace::parse("-1/2,1/3").exact_variances();
  CHECK(exact.first == Rational(1, 6));
  CHECK(exact.second == Rational(1, 6));
}

TEST_CASE("game spec validation and scaling") {
  MoveSpace m = MoveSpace::parse("-1,1");
  CHECK_THROWS_AS(GameSpec(m, 0), ValidationError);
  CHECK_THROWS_AS(GameSpec(m, 1, 0.0), ValidationError);
  GameSpec g = GameSpec::inv_sqrt_scaled(m, 16);
  CHECK(g.payoff_scale == doctest::Approx(0.25));
}

TEST_CASE("payoff evaluation") {
  PayoffSpec b(Butterfly{-0.5, 0.5, 1.5});
  CHECK(evaluate_payoff(b, 1.0) == 0.5);
  CHECK(evaluate_payoff(b, -1.0) == 0.0);
  CHECK(evaluate_payoff(b, 0.5) == 1.0);
  CHECK(evaluate_payoff(b, 3.0) == 0.0);
  CHECK(evaluate_payoff(PayoffSpec(Call{1.0}), 3.0) == 2.0);
  CHECK(evaluate_payoff(PayoffSpec(Put{1.0}), -1.0) == 2.0);
  CHECK(evaluate_payoff(PayoffSpec(Sine{10.0}), 0.1) == doctest::Approx(std::sin(1.0)));

  PiecewiseLinear pl{{{0.0, 0.0}, {1.0, 1.0}}, 0.0, 0.0};
  CHECK(evaluate_payoff(PayoffSpec(pl), 0.5) == 0.5);
  CHECK(evaluate_payoff(PayoffSpec(pl), -3.0) == 0.0);
  CHECK(evaluate_payoff(PayoffSpec(pl), 7.0) == 1.0);
  PiecewiseLinear sloped{{{0.0, 1.0}}, -2.0, 3.0};
  CHECK(evaluate_payoff(PayoffSpec(sloped), -1.0) == 3.0);
  CHECK(evaluate_payoff(PayoffSpec(sloped), 2.0) == 7.0);

  CHECK(evaluate_payoff(PayoffSpec(Call{0.0}, -2.0), 1.0) == -2.0);
  CHECK(evaluate_payoff(b.negated(), 1.0) == -0.5);
}

TEST_CASE("butterfly is nonnegative and supported on [k1, k3]") {
  PayoffSpec b(Butterfly{-0.5, 0.5, 1.5});
  for (int i = -400; i <= 400; ++i) {
    double s = i / 100.0;
    double v = evaluate_payoff(b, s);
    CHECK(v >= 0.0);
    if (s <= -0.5 || s >= 1.5) CHECK(v == 0.0);
  }
}

TEST_CASE("payoff invariants are enforced") {
  CHECK_THROWS_AS(PayoffSpec(Butterfly{1.0, 0.5, 2.0}), ValidationError);
  CHECK_THROWS_AS(PayoffSpec(PiecewiseLinear{{{1.0, 0.0}, {1.0, 2.0}}, 0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(PayoffSpec(PiecewiseLinear{{}, 0.0, 0.0}), ValidationError);
  PayoffSpec path(PathDependent{"max", [](std::span<const double> xs) {
                                  double s = 0, m = 0;
                                  for (double x : xs) m = std::max(m, s += x);
                                  return m;
                                }});
  CHECK_FALSE(path.is_european());
  CHECK_THROWS_WITH_AS(evaluate_payoff(path, 0.0), doctest::Contains("requires full path"), ValidationError);
  std::vector<double> xs{1.0, -2.0, 0.5};
  CHECK(path.evaluate_path(xs) == 1.0);
  CHECK(PayoffSpec(Call{0.0}).evaluate_path(xs) == 0.0);
}

TEST_CASE("payoff parsing") {
  CHECK(std::holds_alternative<Butterfly>(parse_payoff("butterfly(-0.5,0.5,1.5)").kind()));
  CHECK(std::get<Call>(parse_payoff("call(1)").kind()).strike == 1.0);
  CHECK(std::get<Put>(parse_payoff("put(-2)").kind()).strike == -2.0);
  CHECK(std::get<Sine>(parse_payoff("sin(10)").kind()).frequency == 10.0);
  CHECK(evaluate_payoff(parse_payoff("constant(3)"), 12.0) == 3.0);
  CHECK_THROWS_AS(parse_payoff("call(1,2)"), ValidationError);
  CHECK_THROWS_AS(parse_payoff("wiggle(1)"), ValidationError);
  CHECK_THROWS_AS(parse_payoff(""), ValidationError);
  CHECK_THROWS_AS(parse_payoff("/nonexistent/payoff.json"), ValidationError);

  PayoffSpec arr = parse_payoff("[[0,0],[1,1]]");
  CHECK(evaluate_payoff(arr, 0.25) == 0.25);
  CHECK(evaluate_payoff(arr, 5.0) == 1.0);
  PayoffSpec obj = parse_payoff(R"({"kind":"call","strike":0.5,"weight":2})");
  CHECK(evaluate_payoff(obj, 1.5) == 2.0);
  CHECK_THROWS_AS(parse_payoff(R"({"kind":"call"})"), ValidationError);
  CHECK_THROWS_AS(parse_payoff("{not json"), ValidationError);
}

TEST_CASE("payoff file and json round trip") {
  PiecewiseLinear pl{{{-1.0, 0.5}, {0.0, -0.25}, {2.0, 1.0}}, -0.5, 0.75};
  PayoffSpec spec(pl, 1.5);
  nlohmann::json j = payoff_to_json(spec);
  PayoffSpec back = payoff_from_json(j);
  for (double s = -3.0; s <= 3.0; s += 0.25) CHECK(evaluate_payoff(back, s) == evaluate_payoff(spec, s));

  const char* path = "test_model_payoff.json";
  {
    std::ofstream f(path);
    f << j.dump();
  }
  PayoffSpec from_file = parse_payoff(path);
  CHECK(evaluate_payoff(from_file, 1.0) == evaluate_payoff(spec, 1.0));
  std::remove(path);
}

TEST_CASE("piecewise-linear form of the standard payoffs") {
  for (const PayoffSpec& spec : {PayoffSpec(Call{0.3}), PayoffSpec(Put{-0.2}, 2.0), PayoffSpec(Butterfly{})}) {
    auto pl = to_piecewise_linear(spec);
    REQUIRE(pl.has_value());
    for (double s = -3.0; s <= 3.0; s += 0.05) CHECK((*pl)(s) == doctest::Approx(evaluate_payoff(spec, s)));
  }
  CHECK_FALSE(to_piecewise_linear(PayoffSpec(Sine{1.0})).has_value());
}

TEST_CASE("risk-neutral node is exact and zero-mean") {
  MoveSpace m = MoveSpace::parse("-3/2,-1,1/3,2");
  for (int i = 0; i < m.negative_count(); ++i) {
    for (int j = 0; j < m.positive_count(); ++j) {
      auto node = RiskNeutralNode::for_pair(m, {i, j});
      CHECK(node.prob_neg + node.prob_pos == Rational(1));
      CHECK((m.negative(i) * node.prob_neg + m.positive(j) * node.prob_pos).is_zero());
      CHECK(node.prob_neg.sign() >= 0);
      CHECK(node.prob_pos.sign() > 0);
    }
  }
  auto zero = RiskNeutralNode::for_pair(MoveSpace::parse("-1,0,1"), {0, 0});
  CHECK(zero.prob_neg == Rational(0));
  CHECK(zero.prob_pos == Rational(1));
}

TEST_CASE("side parsing") {
  CHECK(parse_side("upper") == Side::Upper);
  CHECK(parse_side("LOWER") == Side::Lower);
  CHECK(to_string(Side::Lower) == "lower");
  CHECK_THROWS_AS(parse_side("middle"), ValidationError);
}
