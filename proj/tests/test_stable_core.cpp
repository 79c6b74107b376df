#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "stablestein/metrics.hpp"
#include "stablestein/stable_core.hpp"
#include "stablestein/stable_law.hpp"

using namespace stablestein;
using std::numbers::pi;

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(StableParams(0.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(StableParams(1.2, 0.0), PreconditionError);
  CHECK_THROWS_AS(StableParams(0.5, 1.0), PreconditionError);
  CHECK_THROWS_AS(StableParams(1.0, 0.3), PreconditionError);
  CHECK_NOTHROW(StableParams(1.0, 0.0));
}

TEST_CASE("d_alpha closed forms") {
  CHECK(d_alpha(1.0) == doctest::Approx(2.0 / pi).epsilon(1e-15));
  // -1/(Gamma(-1/2) cos(pi/4)) = 1/sqrt(2 pi)
  CHECK(d_alpha(0.5) == doctest::Approx(1.0 / std::sqrt(2.0 * pi)).epsilon(1e-14));
  // continuity at 1
  CHECK(d_alpha(1.0 - 1e-7) == doctest::Approx(2.0 / pi).epsilon(1e-6));
}

TEST_CASE("characteristic exponent") {
  StableParams p(0.5, 0.5);
  auto v = char_exponent(p, 4.0);
  CHECK(v.real() == doctest::Approx(-2.0));
  CHECK(v.imag() == doctest::Approx(2.0 * 0.5 * std::tan(pi / 4)));
  auto w = char_exponent(p, -4.0);
  CHECK(w.imag() == doctest::Approx(-v.imag()));
}

TEST_CASE("Cauchy density and distribution") {
  StableParams p(1.0, 0.0);
  for (double x : {-30.0, -2.0, -0.3, 0.0, 0.7, 5.0, 1e3}) {
    CHECK(pdf(p, 1.0, x) == doctest::Approx(1.0 / (pi * (1 + x * x))).epsilon(1e-10));
    CHECK(cdf(p, 1.0, x) == doctest::Approx(0.5 + std::atan(x) / pi).epsilon(1e-10));
  }
  // scaling: time t multiplies the scale by t^{1/alpha}
  CHECK(pdf(p, 2.0, 1.0) == doctest::Approx(2.0 / (pi * 5.0)).epsilon(1e-10));
}

// Fourier inversion in high precision, frozen.
TEST_CASE("frozen density and distribution values") {
  struct Row {
    double a, d, x, pdf, cdf;
  };
  const Row rows[] = {
      {0.5, 0.3, -1.0, 0.0518021928960979, 0.175705892870775},
      {0.5, 0.3, 0.5, 0.254093586562444, 0.53044890780942},
      {0.5, 0.3, 2.0, 0.0570742730271435, 0.7043620678344},
      {0.8, -0.4, 0.0, 0.0899618861902897, 0.85356298930606},
      {0.8, -0.4, 1.5, 0.0218371774170588, 0.918989273620165},
      {0.3, 0.0, 0.7, 0.0768402877856730, 0.694362500785367},
  };
  for (const auto& r : rows) {
    StableParams p(r.a, r.d);
    CAPTURE(r.a);
    CAPTURE(r.x);
    CHECK(std::abs(pdf(p, 1.0, r.x) - r.pdf) < 1e-8);
    CHECK(std::abs(cdf(p, 1.0, r.x) - r.cdf) < 1e-8);
  }
}

TEST_CASE("positivity probability") {
  // P(Z > 0) = 1/2 + arctan(delta tan(pi alpha/2)) / (pi alpha)
  for (double a : {0.3, 0.5, 0.9})
    for (double d : {-0.7, 0.0, 0.4}) {
      StableParams p(a, d);
      double expect = 0.5 + std::atan(d * std::tan(pi * a / 2)) / (pi * a);
      CHECK(1.0 - cdf(p, 1.0, 0.0) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("density integrates to the distribution function") {
  StableParams p(0.6, 0.2);
  double lo = -1.5, hi = 2.5;
  double mass = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double x) { return pdf(p, 1.0, x); }, lo, hi, 10, 1e-12);
  CHECK(mass == doctest::Approx(cdf(p, 1.0, hi) - cdf(p, 1.0, lo)).epsilon(1e-9));
}

TEST_CASE("tail probability matches the asymptote far out") {
  StableParams p(0.5, 0.4);
  for (double x : {1e8, -1e8}) {
    double r = tail_probability(p, 1.0, x) / tail_asymptote(p, x);
    CHECK(r == doctest::Approx(1.0).epsilon(1e-3));
  }
  CHECK(tail_probability(p, 1.0, 3.0) == doctest::Approx(1.0 - cdf(p, 1.0, 3.0)).epsilon(1e-9));
}

TEST_CASE("Levy measure") {
  StableParams p(0.5, 0.5);
  LevyMeasure nu(p);
  CHECK(nu.density(2.0) == doctest::Approx(d_alpha(0.5) * 1.5 / (2 * std::pow(2.0, 1.5))));
  CHECK(nu.density(-2.0) == doctest::Approx(d_alpha(0.5) * 0.5 / (2 * std::pow(2.0, 1.5))));
  // nu(u, inf) = d (1 + delta) / (2 alpha u^alpha)
  CHECK(nu.tail_mass(4.0) == doctest::Approx(d_alpha(0.5) * 1.5 / (2 * 0.5 * 2.0)));
}

TEST_CASE("sampler reproduces the law") {
  for (auto [a, d] : {std::pair{0.5, 0.0}, std::pair{0.7, -0.5}, std::pair{1.0, 0.0}}) {
    StableParams p(a, d);
    auto xs = sample(p, 20000, 42);
    CHECK(xs == sample(p, 20000, 42));
    SampleSet s(xs);
    // 1% critical value of sqrt(n) D
    CHECK(std::sqrt(20000.0) * d_kol_empirical(s, p) < 1.628);
  }
}

TEST_CASE("streams are independent and reproducible") {
  auto r1 = make_rng(5, 0), r2 = make_rng(5, 1), r3 = make_rng(5, 0);
  auto a = r1(), b = r2(), c = r3();
  CHECK(a == c);
  CHECK(a != b);
}

TEST_CASE("tabulated law agrees with direct inversion") {
  for (auto [a, d] : {std::pair{0.5, 0.3}, std::pair{1.0, 0.0}, std::pair{0.8, -0.6}}) {
    StableParams p(a, d);
    auto law = StableLaw::get(p);
    for (double y : {-40.0, -3.0, -0.5, 0.0, 0.2, 1.7, 12.0, 500.0}) {
      CAPTURE(y);
      CHECK(law->pdf(y) == doctest::Approx(pdf(p, 1.0, y)).epsilon(1e-8));
      CHECK(law->cdf(y) == doctest::Approx(cdf(p, 1.0, y)).epsilon(1e-8));
    }
    for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(law->cdf(law->quantile(u)) == doctest::Approx(u).epsilon(1e-9));
  }
  CHECK(StableLaw::get(StableParams(1.0, 0.0))->sup_density() == doctest::Approx(1.0 / pi).epsilon(1e-9));
}

TEST_CASE("product rule expectations") {
  // E 1/(1 + (a Z + b)^2) = int_0^inf e^{-l} e^{-(a l)^alpha} cos(l b) dl for symmetric Z
  for (double a : {0.5, 1.0}) {
    auto law = StableLaw::get(StableParams(a, 0.0));
    CHECK(law->expect([](double) { return 1.0; }, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    for (double s : {0.7, 3.0}) {
      double got = law->expect([](double z) { return 1.0 / (1.0 + z * z); }, s, 0.4);
      double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double l) { return std::exp(-l - std::pow(s * l, a)) * std::cos(0.4 * l); }, 0.0, 60.0, 15, 1e-13);
      CHECK(got == doctest::Approx(ref).epsilon(1e-8));
    }
  }
  // E min(1, |Z|) against the density
  StableParams p(0.5, 0.3);
  auto law = StableLaw::get(p);
  auto g = [](double z) { return std::min(1.0, std::abs(z)); };
  double feats[] = {-1.0, 0.0, 1.0};
  double got = law->expect(g, 1.0, 0.0, feats);
  double inner = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double x) { return std::abs(x) * pdf(p, 1.0, x); }, -1.0, 0.0, 12, 1e-12) +
                 boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double x) { return x * pdf(p, 1.0, x); }, 0.0, 1.0, 12, 1e-12);
  double expect = inner + tail_probability(p, 1.0, 1.0) + tail_probability(p, 1.0, -1.0);
  CHECK(got == doctest::Approx(expect).epsilon(1e-7));
}
