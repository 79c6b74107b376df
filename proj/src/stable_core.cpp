#include "stablestein/stable_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stablestein {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

StableParams::StableParams(double alpha, double delta) : alpha_(alpha), delta_(delta) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw PreconditionError("alpha must lie in (0, 1]");
  if (!(std::abs(delta) < 1.0))
    throw PreconditionError("delta must lie in (-1, 1)");
  if (alpha == 1.0 && delta != 0.0)
    throw PreconditionError("alpha = 1 requires delta = 0");
}

double d_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw PreconditionError("alpha must lie in (0, 1]");
  if (alpha == 1.0) return 2.0 / kPi;
  return -1.0 / (std::tgamma(-alpha) * std::cos(kPi * alpha / 2.0));
}

LevyMeasure::LevyMeasure(const StableParams& p)
    : alpha(p.alpha()), delta(p.delta()), d(d_alpha(p.alpha())) {}

double LevyMeasure::density(double u) const {
  if (u == 0.0) return std::numeric_limits<double>::infinity();
  const double k = u > 0 ? 1.0 + delta : 1.0 - delta;
  return d * k / (2.0 * std::pow(std::abs(u), 1.0 + alpha));
}

double LevyMeasure::tail_mass(double u) const {
  if (u == 0.0) return std::numeric_limits<double>::infinity();
  const double k = u > 0 ? 1.0 + delta : 1.0 - delta;
  return d * k / (2.0 * alpha) * std::pow(std::abs(u), -alpha);
}

cplx char_exponent(const StableParams& p, double lambda) {
  const double a = std::pow(std::abs(lambda), p.alpha());
  if (p.is_cauchy()) return {-a, 0.0};
  const double s = (lambda > 0) - (lambda < 0);
  return {-a, a * p.delta() * s * std::tan(kPi * p.alpha() / 2.0)};
}

double tail_asymptote(const StableParams& p, double x) {
  if (x == 0.0) throw PreconditionError("tail_asymptote needs x != 0");
  const double k = x > 0 ? 1.0 + p.delta() : 1.0 - p.delta();
  return d_alpha(p.alpha()) / p.alpha() * 0.5 * k * std::pow(std::abs(x), -p.alpha());
}

namespace {

// exp(z) - 1 without cancellation for small |z|.
cplx expm1c(cplx z) {
  const double a = z.real(), b = z.imag();
  const double s = std::sin(0.5 * b);
  return {std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
}

// Fourier inversion along the ray lambda = r e^{i theta}, r = u^{1/alpha}.
// The ray angle keeps both exp(-i x lambda) and exp(t psi) decaying, so the
// integrand has no oscillatory tail. x >= 0 here; negative x is reflected.
struct Contour {
  double alpha, t, x;
  double theta, rho, eta;
  cplx rot;     // e^{i theta}
  cplx expo;    // t rho e^{i(alpha theta - eta)}
  double c1, c2;

  Contour(double alpha_, double delta, double t_, double x_) : alpha(alpha_), t(t_), x(x_) {
    const double k = alpha < 1.0 ? delta * std::tan(kPi * alpha / 2.0) : 0.0;
    eta = std::atan(k);
    rho = std::hypot(1.0, k);
    theta = -std::min(kPi / 2.0, (kPi / 2.0 - eta) / (2.0 * alpha));
    rot = std::polar(1.0, theta);
    expo = t * rho * std::polar(1.0, alpha * theta - eta);
    c1 = x * std::sin(-theta);
    c2 = expo.real();
  }

  // Initial subdivision of [0, U] around the two decay scales.
  std::vector<double> breakpoints() const {
    const double l1 = 40.0, l2 = 40.0 / alpha;
    double upper = l2 / c2;
    double scale = 1.0 / c2;
    if (c1 > 0.0) {
      const double ua = std::pow(1.0 / c1, alpha);
      upper = std::min(upper, std::pow(l1 / c1, alpha));
      scale = std::min(scale, ua);
    }
    std::vector<double> pts{0.0};
    for (double s = scale / 64.0; s < upper; s *= 4.0) pts.push_back(s);
    pts.push_back(upper);
    return pts;
  }
};

QuadratureConfig tight(const QuadratureConfig& cfg) {
  QuadratureConfig c = cfg;
  c.abs_tol = 1e-300;
  return c;
}

// Convergent expansion for alpha < 1 and large y:
//   p(y)     = (1/pi) sum_k (-1)^{k+1} rho^k Gamma(k a + 1)/k! sin(k(eta + pi a/2)) y^{-k a - 1},
//   P(Z > y) = the same with Gamma(k a) and y^{-k a}.
// Used where the contour integral would have to resolve a tiny value.
bool series_applies(double alpha, double delta, double y) {
  if (alpha >= 1.0) return false;
  const double k = delta * std::tan(kPi * alpha / 2.0);
  return std::hypot(1.0, k) * std::pow(y, -alpha) <= 0.2;
}

double large_y_series(double alpha, double delta, double y, bool density) {
  const double k = delta * std::tan(kPi * alpha / 2.0);
  const double rho = std::hypot(1.0, k), phase = std::atan(k) + kPi * alpha / 2.0;
  const double lz = std::log(rho) - alpha * std::log(y);
  double sum = 0.0;
  for (int j = 1; j <= 400; ++j) {
    const double g = density ? std::lgamma(j * alpha + 1.0) : std::lgamma(j * alpha);
    const double mag = std::exp(j * lz + g - std::lgamma(j + 1.0));
    const double term = (j % 2 ? 1.0 : -1.0) * mag * std::sin(j * phase);
    sum += term;
    if (mag < 1e-17 * std::abs(sum)) break;
  }
  return std::max(0.0, (density ? sum / y : sum) / kPi);
}

double pdf_nonneg(double alpha, double delta, double t, double x, const QuadratureConfig& cfg) {
  const double sc = std::pow(t, 1.0 / alpha);
  if (series_applies(alpha, delta, x / sc)) return large_y_series(alpha, delta, x / sc, true) / sc;
  Contour c(alpha, delta, t, x);
  const bool subtract = x >= std::pow(t, 1.0 / alpha);
  const double ia = 1.0 / alpha;
  auto f = [&](double u) -> double {
    if (u <= 0.0) return 0.0;
    const double r = std::pow(u, ia);
    const cplx e = -cplx(0.0, 1.0) * x * r * c.rot;
    const cplx phi = subtract ? expm1c(-u * c.expo) : std::exp(-u * c.expo);
    const cplx v = c.rot * std::exp(e) * phi;
    return v.real() * ia * r / u;
  };
  auto pts = c.breakpoints();
  QuadratureConfig q = tight(cfg);
  QuadResult r = integrate_adaptive(f, pts, q);
  if (!r.converged && r.abs_error > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(r.value)))
    throw NumericalFailure("pdf", r.value / kPi, r.abs_error / kPi);
  return std::max(r.value / kPi, 0.0);
}

// P(Z > x) for x > 0.
double upper_tail(double alpha, double delta, double t, double x, const QuadratureConfig& cfg) {
  const double sc = std::pow(t, 1.0 / alpha);
  if (series_applies(alpha, delta, x / sc)) return large_y_series(alpha, delta, x / sc, false);
  Contour c(alpha, delta, t, x);
  const bool subtract = x >= std::pow(t, 1.0 / alpha);
  const double ia = 1.0 / alpha;
  auto f = [&](double u) -> double {
    if (u <= 0.0) return 0.0;
    const double r = std::pow(u, ia);
    const cplx e = std::exp(-cplx(0.0, 1.0) * x * r * c.rot);
    const cplx v = subtract ? e * expm1c(-u * c.expo) : e * std::exp(-u * c.expo);
    return v.imag() * ia / u;
  };
  auto pts = c.breakpoints();
  QuadratureConfig q = tight(cfg);
  QuadResult r = integrate_adaptive(f, pts, q);
  if (!r.converged && r.abs_error > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(r.value)))
    throw NumericalFailure("cdf", r.value / kPi, r.abs_error / kPi);
  const double base = subtract ? 0.0 : 0.5 + c.theta / kPi;
  return std::clamp(base + r.value / kPi, 0.0, 1.0);
}

}  // namespace

double pdf(const StableParams& p, double t, double x, const QuadratureConfig& cfg) {
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("pdf needs t > 0");
  if (std::isnan(x)) throw PreconditionError("pdf needs a finite x");
  if (std::isinf(x)) return 0.0;
  return x >= 0 ? pdf_nonneg(p.alpha(), p.delta(), t, x, cfg)
                : pdf_nonneg(p.alpha(), -p.delta(), t, -x, cfg);
}

double tail_probability(const StableParams& p, double t, double x, const QuadratureConfig& cfg) {
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("tail_probability needs t > 0");
  if (std::isnan(x) || x == 0.0) throw PreconditionError("tail_probability needs x != 0");
  if (std::isinf(x)) return 0.0;
  return x > 0 ? upper_tail(p.alpha(), p.delta(), t, x, cfg)
               : upper_tail(p.alpha(), -p.delta(), t, -x, cfg);
}

double cdf(const StableParams& p, double t, double x, const QuadratureConfig& cfg) {
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("cdf needs t > 0");
  if (std::isnan(x)) throw PreconditionError("cdf needs a non-NaN x");
  if (x == 0.0) {
    const double k = p.alpha() < 1.0 ? p.delta() * std::tan(kPi * p.alpha() / 2.0) : 0.0;
    return 0.5 - std::atan(k) / (kPi * p.alpha());
  }
  if (x > 0) return 1.0 - tail_probability(p, t, x, cfg);
  return tail_probability(p, t, x, cfg);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

namespace {
// Uniform on the open interval (0, 1) from 53 random bits.
double open_uniform(std::mt19937_64& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}
}  // namespace

double sample_one(const StableParams& p, std::mt19937_64& rng) {
  const double v = kPi * (open_uniform(rng) - 0.5);
  if (p.is_cauchy()) return std::tan(v);
  const double w = -std::log(open_uniform(rng));
  const double a = p.alpha();
  const double k = p.delta() * std::tan(kPi * a / 2.0);
  const double b = std::atan(k) / a;
  const double s = std::pow(1.0 + k * k, 1.0 / (2.0 * a));
  const double av = a * (v + b);
  return s * std::sin(av) / std::pow(std::cos(v), 1.0 / a) *
         std::pow(std::cos(v - av) / w, (1.0 - a) / a);
}

std::vector<double> sample(const StableParams& p, std::size_t n, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = sample_one(p, rng);
  return out;
}

}  // namespace stablestein
