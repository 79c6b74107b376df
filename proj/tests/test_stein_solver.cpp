#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "stablestein/stein_solver.hpp"

using namespace stablestein;
using boost::math::quadrature::gauss_kronrod;

namespace {

// E e^{-(sZ + m)^2/2} / 2 for symmetric Z by Parseval.
double bump_expectation(double alpha, double s, double m) {
  auto g = [&](double l) { return std::exp(-std::pow(s * l, alpha) - 0.5 * l * l) * std::cos(l * m); };
  return 0.5 * std::sqrt(2.0 / std::numbers::pi) * gauss_kronrod<double, 61>::integrate(g, 0.0, 40.0, 15, 1e-13);
}

}  // namespace

TEST_CASE("expected_h against Parseval") {
  for (double a : {0.5, 1.0}) {
    StableParams p(a, 0.0);
    CHECK(expected_h(p, gaussian_bump()) == doctest::Approx(bump_expectation(a, 1.0, 0.0)).epsilon(1e-8));
    CHECK(std::abs(expected_h(p, half_tanh())) < 1e-10);
  }
}

TEST_CASE("semigroup against Parseval") {
  for (double a : {0.5, 1.0}) {
    StableParams p(a, 0.0);
    for (double t : {0.1, 1.0, 4.0})
      for (double x : {-1.0, 2.0}) {
        double s = std::pow(1.0 - std::exp(-t), 1.0 / a), m = std::exp(-t / a) * x;
        CHECK(qt_apply(p, gaussian_bump(), t, x) == doctest::Approx(bump_expectation(a, s, m)).epsilon(1e-7));
      }
  }
}

TEST_CASE("semigroup limits") {
  StableParams p(0.5, 0.3);
  auto h = half_tanh();
  CHECK(qt_apply(p, h, 1e-9, 0.8) == doctest::Approx(h.value(0.8)).epsilon(1e-4));
  CHECK(qt_apply(p, h, 60.0, 0.8) == doctest::Approx(expected_h(p, h)).epsilon(1e-8));
}

TEST_CASE("exact OU step matches the semigroup") {
  StableParams p(0.7, 0.4);
  auto h = gaussian_bump();
  auto rng = make_rng(3);
  const int n = 40000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = h.value(ou_sample(p, 1.0, 0.5, rng));
    s += v;
    s2 += v * v;
  }
  double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - qt_apply(p, h, 0.5, 1.0)) < 4 * se);
}

TEST_CASE("solution value against a time integral of the Parseval semigroup") {
  StableParams p(1.0, 0.0);
  SteinSolution sol(p, gaussian_bump());
  const double eh = bump_expectation(1.0, 1.0, 0.0);
  for (double x : {0.0, 1.5}) {
    auto dev = [&](double t) {
      return bump_expectation(1.0, 1.0 - std::exp(-t), std::exp(-t) * x) - eh;
    };
    double ref = -gauss_kronrod<double, 31>::integrate(dev, 0.0, 50.0, 12, 1e-11);
    CHECK(sol.value(x) == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("Stein equation residual") {
  for (double a : {0.5, 1.0}) {
    StableParams p(a, 0.0);
    for (auto h : {clamp_identity(), half_tanh()}) {
      SteinSolution sol(p, h);
      for (double x : {-2.0, 0.0, 1.5}) {
        CAPTURE(a);
        CAPTURE(h.name);
        CAPTURE(x);
        CHECK(std::abs(sol.residual(x)) < 5e-3);
      }
    }
  }
}

TEST_CASE("symmetry and derivative consistency") {
  StableParams p(0.5, 0.0);
  SteinSolution sol(p, half_tanh());
  CHECK(sol.value(0.7) == doctest::Approx(-sol.value(-0.7)).epsilon(1e-8));
  CHECK(std::abs(sol.value(0.0)) < 1e-10);
  CHECK(sol.derivative(0.7) == doctest::Approx(sol.central_difference(0.7)).epsilon(1e-5));
  // ||f'|| <= alpha
  for (double x : {-3.0, 0.0, 0.4, 2.0}) CHECK(std::abs(sol.derivative(x)) <= 0.5 + 1e-3);
}

TEST_CASE("regularity probe respects the derivative cap") {
  StableParams p(1.0, 0.0);
  ProbeConfig pc;
  pc.pairs = 50;
  pc.operator_points = 2;
  auto r = regularity_probe(p, clamp_identity(), 0.5, pc);
  const auto* sup = r.find("fprime_sup");
  REQUIRE(sup != nullptr);
  CHECK(sup->failure.empty());
  CHECK(sup->cap == 1.0);
  CHECK_FALSE(sup->exceeds_cap);
  CHECK(r.find("fprime_loglip") != nullptr);
  CHECK(r.find("nonexistent") == nullptr);
}

TEST_CASE("test function catalogue") {
  CHECK(d_beta(0.0, 0.25, 0.5) == doctest::Approx(0.25));
  CHECK(d_beta(0.0, 4.0, 0.5) == doctest::Approx(2.0));
  for (const auto& name : test_function_names()) {
    auto h = test_function_by_name(name, 0.25);
    CHECK(h.name == name);
  }
  CHECK_THROWS(test_function_by_name("nope", 0.25));
  CHECK(check_membership(dbeta_abs(0.25), 0.25).member);
  CHECK(check_membership(half_tanh(), 0.25).member);
  // clamp-id has slope 1 but range 2, so it is not 1-Lipschitz for d_beta at long range
  CHECK_FALSE(check_membership(clamp_identity(), 0.25).member);
  CHECK(check_membership(ramp_step(0.0, 2.0), 0.25).member);
}
