#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stablestein/metrics.hpp"
#include "stablestein/stable_law.hpp"

using namespace stablestein;

TEST_CASE("sample sets are sorted") {
  SampleSet s({3.0, -1.0, 2.0}, "t");
  CHECK(s.values() == std::vector<double>{-1.0, 2.0, 3.0});
  CHECK(s.tag() == "t");
}

TEST_CASE("Kolmogorov distance of mid-point quantiles is 1/(2n)") {
  for (double a : {0.5, 1.0}) {
    StableParams p(a, 0.0);
    for (std::size_t n : {10, 400}) {
      auto ref = stratified_reference(p, n);
      CHECK(d_kol_empirical(ref, p) == doctest::Approx(0.5 / n).epsilon(1e-6));
    }
  }
}

TEST_CASE("Kolmogorov distance of a point mass") {
  StableParams p(1.0, 0.0);
  SampleSet s(std::vector<double>(5, 0.0));
  CHECK(d_kol_empirical(s, p) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("Kolmogorov standard error") {
  // sd of the Kolmogorov law: sqrt(pi^2/12 - pi log(2)^2 / 2)
  double sd = std::sqrt(std::numbers::pi * std::numbers::pi / 12 -
                        std::numbers::pi * std::log(2.0) * std::log(2.0) / 2);
  CHECK(kolmogorov_se(10000) == doctest::Approx(sd / 100).epsilon(1e-6));
}

TEST_CASE("rank coupling cost") {
  SampleSet a({0.0, 1.0, 5.0}), b({0.25, 1.25, 5.25});
  CHECK(d_wbeta_upper(a, a, 0.5) == 0.0);
  CHECK(d_wbeta_upper(a, b, 0.5) == doctest::Approx(0.25));
  SampleSet c({4.0, 5.0, 9.0});
  CHECK(d_wbeta_upper(a, c, 0.5) == doctest::Approx(2.0));
  CHECK_THROWS(d_wbeta_upper(a, SampleSet({1.0}), 0.5));
}

TEST_CASE("Kolmogorov from d_W_beta") {
  StableParams p(1.0, 0.0);
  CHECK(kol_from_wbeta(0.04, p) == doctest::Approx((1 + 1 / std::numbers::pi) * 0.2).epsilon(1e-9));
}

TEST_CASE("dictionary lower estimate") {
  StableParams p(0.5, 0.0);
  auto dict = hbeta_dictionary(p, 0.25, 64);
  CHECK(dict.size() == 64);
  for (const auto& h : dict) CHECK(check_membership(h, 0.25, 2000).member);
  // exact draws sit at the noise floor
  SampleSet s(sample(p, 5000, 9));
  auto lo = d_wbeta_lower(s, p, 0.25, 16);
  CHECK(lo.value >= 0.0);
  CHECK(lo.value < 4 * lo.noise_envelope);
  // a shifted sample is detected far beyond noise
  auto xs = sample(p, 5000, 9);
  for (auto& x : xs) x += 2.0;
  auto far = d_wbeta_lower(SampleSet(xs), p, 0.25, 16);
  CHECK(far.value > 10 * far.noise_envelope);
  CHECK(d_fm_lower(SampleSet(xs), p, 0.25, 16).value > 0.0);
}
