#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "stablestein/quadrature.hpp"

namespace stablestein {

/// Shape of a strictly stable law with characteristic exponent
///   psi(l) = -|l|^alpha (1 - i delta sign(l) tan(pi alpha/2)),  alpha < 1,
///   psi(l) = -|l|,                                              alpha = 1.
/// Construction validates 0 < alpha <= 1, |delta| < 1 and delta = 0 at alpha = 1.
class StableParams {
 public:
  StableParams(double alpha, double delta);
  double alpha() const noexcept { return alpha_; }
  double delta() const noexcept { return delta_; }
  bool is_cauchy() const noexcept { return alpha_ == 1.0; }
  bool operator==(const StableParams&) const = default;

 private:
  double alpha_;
  double delta_;
};

/// Lévy density d_alpha k_delta(u) / (2 |u|^{1+alpha}) with k_delta = 1 + delta sign(u).
struct LevyMeasure {
  double alpha;
  double delta;
  double d;
  explicit LevyMeasure(const StableParams& p);
  double density(double u) const;
  /// nu(u, inf) for u > 0 and nu(-inf, u) for u < 0.
  double tail_mass(double u) const;
};

/// -1 / (Gamma(-alpha) cos(pi alpha / 2)) for alpha < 1, 2/pi at alpha = 1.
double d_alpha(double alpha);

std::complex<double> char_exponent(const StableParams& p, double lambda);

/// Density of the law with characteristic function exp(t psi).
double pdf(const StableParams& p, double t, double x, const QuadratureConfig& cfg = {});
double cdf(const StableParams& p, double t, double x, const QuadratureConfig& cfg = {});

/// P(Z > x) for x > 0 or P(Z < x) for x < 0, computed without cancellation
/// against one.
double tail_probability(const StableParams& p, double t, double x, const QuadratureConfig& cfg = {});

/// Leading tail term (d_alpha/alpha) ((1 +- delta)/2) |x|^-alpha, sign chosen by x.
double tail_asymptote(const StableParams& p, double x);

/// Deterministic per-replicate generator: the same (seed, stream) always
/// yields the same draws.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// One Chambers-Mallows-Stuck draw.
double sample_one(const StableParams& p, std::mt19937_64& rng);
std::vector<double> sample(const StableParams& p, std::size_t n, std::uint64_t seed);

}  // namespace stablestein
