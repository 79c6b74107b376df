#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stablestein/bounds.hpp"

using namespace stablestein;

TEST_CASE("Pareto terms by hand, alpha < 1") {
  // eps = |x|^a/2 - 1/2 inside, 0 outside: t2 = a n^{-1/a}, t3 = 0,
  // J = 1/2 - 1/(2(1-a)), remainder = n^{(a-1)/a} 2 |delta J|
  const double a = 0.5, n = 100.0;
  auto b0 = theorem_bound(AttractionModel::pareto(a, 0.0), n);
  CHECK(b0.t1 == doctest::Approx(1.0 / n));
  CHECK(b0.t2 == doctest::Approx(a * std::pow(n, -1.0 / a)).epsilon(1e-10));
  CHECK(b0.t3 == doctest::Approx(0.0));
  CHECK(b0.remainder == doctest::Approx(0.0));
  CHECK(b0.closed_form);
  auto b1 = theorem_bound(AttractionModel::pareto(a, 0.5), n);
  double J = 0.5 - 1.0 / (2 * (1 - a));
  CHECK(b1.remainder == doctest::Approx(std::pow(n, (a - 1) / a) * 2 * 0.5 * std::abs(J)).epsilon(1e-10));
  CHECK(b1.total == doctest::Approx(b1.t1 + b1.t2 + b1.t3 + b1.remainder));
}

TEST_CASE("Pareto terms by hand, alpha = 1") {
  // t2 = (3 + log M)/n with M = sigma n
  const double n = 1000.0;
  auto m = AttractionModel::pareto(1.0, 0.0);
  auto b = theorem_bound(m, n);
  double M = sigma_of(m) * n;
  CHECK(b.t1 == doctest::Approx(std::log(n) * std::log(n) / n));
  CHECK(b.t2 == doctest::Approx((3 + std::log(M)) / n).epsilon(1e-10));
  CHECK(b.remainder == 0.0);
}

TEST_CASE("closed forms agree with generic quadrature") {
  BoundConfig gen;
  gen.generic = true;
  for (const auto& m : {AttractionModel::pareto(0.5, 0.5), AttractionModel::mixed(0.5, 0.8, 0.25, 0.25, 0.0),
                        AttractionModel::mixed(0.6, 1.3, 0.3, 0.2, -0.4), AttractionModel::mixed(1.0, 1.5, 0.25, 0.25, 0.0)})
    for (double n : {1e2, 1e5}) {
      CAPTURE(m.id());
      CAPTURE(n);
      auto c = theorem_bound(m, n), g = theorem_bound(m, n, gen);
      CHECK_FALSE(g.closed_form);
      CHECK(g.t2 == doctest::Approx(c.t2).epsilon(1e-8));
      CHECK(g.t3 == doctest::Approx(c.t3).epsilon(1e-8));
      CHECK(g.remainder == doctest::Approx(c.remainder).epsilon(1e-7));
    }
}

TEST_CASE("knot model uses quadrature and tracks its analytic twin") {
  std::vector<EpsKnot> k;
  for (double x = 1.0; x <= 1024.0; x *= 2.0) {
    double e = 0.25 * std::pow(x, -0.3);
    k.push_back({x, e, -0.3 * e / x});
  }
  auto kn = AttractionModel::from_knots(0.5, 0.0, 0.25, k);
  auto b = theorem_bound(kn, 1e4), c = theorem_bound(AttractionModel::mixed(0.5, 0.8, 0.25, 0.25, 0.0), 1e4);
  CHECK_FALSE(b.closed_form);
  CHECK(b.total == doctest::Approx(c.total).epsilon(2e-2));
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(theorem_bound(AttractionModel::logtail(1.0), 100), PreconditionError);
  BoundConfig cfg;
  cfg.beta = 0.6;
  CHECK_THROWS_AS(theorem_bound(AttractionModel::pareto(0.5, 0.0), 100, cfg), PreconditionError);
  CHECK_THROWS_AS(bound_appendixB(1.0, 2.0), PreconditionError);
}

TEST_CASE("log-tail rate expression") {
  auto b = bound_appendixB(1.0, 10.0);
  double g = gamma_n(1.0, 10.0);
  CHECK(b.t1 == doctest::Approx(1.0 / std::log(g)));
  CHECK(b.t1 == doctest::Approx(0.279552).epsilon(1e-6));
  CHECK(b.t2 == doctest::Approx(std::log(g) / g));
  CHECK(b.t3 == doctest::Approx(std::log(10.0) * std::log(10.0) / 10.0));
  auto h = bound_appendixB(0.5, 1e4);
  CHECK(h.t2 == doctest::Approx(std::pow(1e4, 1.0) / gamma_n(0.5, 1e4)));
  CHECK(h.t3 == 0.0);
}

TEST_CASE("rate fits on synthetic curves") {
  std::vector<double> n = decades(2, 6), p, l, q;
  CHECK(n.front() == 100.0);
  CHECK(n.back() == 1e6);
  for (double v : n) {
    p.push_back(3 * std::pow(v, -0.7));
    l.push_back(2 * std::log(v) * std::log(v) / v);
    q.push_back(5 / std::log(v));
  }
  auto fp = rate_fit(n, p, RateModel::kPower);
  CHECK(fp.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(fp.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fp.residual < 1e-12);
  CHECK(rate_fit(n, l, RateModel::kPowerTimesLogSq).slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rate_fit(n, q, RateModel::kInverseLog).slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rate_fit(n, std::vector<double>(n.size(), 2.0), RateModel::kPower).degenerate);
  CHECK_THROWS_AS(rate_fit({10, 100, 1000}, {1, 2, 3}, RateModel::kPower), PreconditionError);
  CHECK(rate_model_from_name("inverse_log") == RateModel::kInverseLog);
  CHECK(rate_model_name(RateModel::kPowerTimesLogSq) == "power_times_logsq");
  CHECK_THROWS_AS(rate_model_from_name("cubic"), PreconditionError);
}

TEST_CASE("bound curves") {
  auto c = bound_curve(AttractionModel::pareto(0.5, 0.0), decades(2, 6), RateModel::kPower);
  CHECK(c.bound_values.size() == 5);
  CHECK(c.fitted_slope == doctest::Approx(-1.0).epsilon(0.05));
  auto a = appendixB_curve(1.0, decades(4, 12), RateModel::kInverseLog);
  for (std::size_t i = 1; i < a.bound_values.size(); ++i) CHECK(a.bound_values[i] < a.bound_values[i - 1]);
}
