#include "stablestein/frac_ops.hpp"

#include <algorithm>
#include <cmath>

namespace stablestein {

namespace {

// Geometric breakpoints on [lo, hi] plus feature distances.
std::vector<double> radial_breaks(double lo, double hi, const std::vector<double>& features,
                                  double x, double a) {
  std::vector<double> pts;
  for (double u = lo; u < hi; u *= 4.0) pts.push_back(u);
  pts.push_back(hi);
  for (double z : features) {
    const double u = std::abs(z - x) / a;
    if (u > lo && u < hi) pts.push_back(u);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Breakpoints in w for the far field u = (V w^2)^{-1/alpha}, V = U^-alpha.
std::vector<double> far_breaks(double upper, double alpha, const std::vector<double>& features,
                               double x, double a) {
  std::vector<double> pts{0.0, 1.0};
  for (double z : features) {
    const double u = std::abs(z - x) / a;
    if (u > upper) pts.push_back(std::sqrt(std::pow(u / upper, -alpha)));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// int_U^inf g(u) u^{-1-alpha} du through u = (V w^2)^{-1/alpha}.
double far_field_integral(const std::function<double(double)>& g, double upper, double alpha,
                          const std::vector<double>& features, double x, double a,
                          const QuadratureConfig& cfg, const char* stage) {
  const double v = std::pow(upper, -alpha);
  auto integrand = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double u = std::pow(v * w * w, -1.0 / alpha);
    if (!std::isfinite(u)) return 0.0;
    return g(u) * 2.0 * v * w / alpha;
  };
  auto pts = far_breaks(upper, alpha, features, x, a);
  return integrate_checked(integrand, pts, cfg, stage);
}

}  // namespace

double apply_L(const StableParams& p, const Evaluand& f, double x, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!f.value) throw PreconditionError("apply_L needs a value function");
  const double alpha = p.alpha();
  const double half_d = 0.5 * d_alpha(alpha);
  const double kp = 1.0 + p.delta(), km = 1.0 - p.delta();
  const double f0 = f.value(x);
  auto pair = [&](double u) { return kp * (f.value(x + u) - f0) + km * (f.value(x - u) - f0); };
  const double eps = cfg.inner_radius;

  double inner;
  if (f.derivative) {
    const double f1 = f.derivative(x);
    const double f2 = (f.derivative(x + eps) - f.derivative(x - eps)) / (2.0 * eps);
    inner = f2 * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);
    if (alpha < 1.0) inner += 2.0 * p.delta() * f1 * std::pow(eps, 1.0 - alpha) / (1.0 - alpha);
    inner *= half_d;
  } else {
    // Below h the difference f(x+u) - f(x) is mostly rounding, so the first
    // piece uses finite-difference Taylor coefficients.
    const double h = std::min(eps, 1e-2 * eps * std::max(1.0, std::abs(x)));
    const double fp = f.value(x + h), fm = f.value(x - h);
    const double f1 = (fp - fm) / (2.0 * h), f2 = (fp - 2.0 * f0 + fm) / (h * h);
    inner = f2 * std::pow(h, 2.0 - alpha) / (2.0 - alpha);
    if (alpha < 1.0) inner += 2.0 * p.delta() * f1 * std::pow(h, 1.0 - alpha) / (1.0 - alpha);
    inner *= half_d;
    if (h < eps) {
      if (alpha < 1.0) {
        // u = eps w^{1/(1-alpha)} absorbs the u^{-1-alpha} singularity.
        const double e = 1.0 / (1.0 - alpha);
        const double scale = half_d * std::pow(eps, -alpha) * e;
        auto g = [&](double w) { return pair(eps * std::pow(w, e)) * scale * std::pow(w, -e); };
        inner += integrate_checked(g, std::pow(h / eps, 1.0 - alpha), 1.0, cfg, "apply_L core");
      } else {
        auto g = [&](double u) { return pair(u) * half_d / (u * u); };
        inner += integrate_checked(g, h, eps, cfg, "apply_L core");
      }
    }
  }

  const bool osc = f.far_field == FarField::kOscillatory;
  const double upper = osc ? cfg.oscillatory_cutoff : cfg.far_field_start;
  auto mid_integrand = [&](double u) { return pair(u) * half_d * std::pow(u, -1.0 - alpha); };
  auto pts = radial_breaks(eps, upper, f.features, x, 1.0);
  const double mid = integrate_checked(mid_integrand, pts, cfg, "apply_L body");

  double far;
  if (osc) {
    far = -f0 * 2.0 * half_d * std::pow(upper, -alpha) / alpha;
  } else {
    auto g = [&](double u) { return pair(u) * half_d; };
    far = far_field_integral(g, upper, alpha, f.features, x, 1.0, cfg, "apply_L far field");
  }
  return inner + mid + far;
}

double apply_A(const StableParams& p, const Evaluand& f, double x, const QuadratureConfig& cfg) {
  double fp;
  if (f.derivative) {
    fp = f.derivative(x);
  } else {
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    fp = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
  }
  return apply_L(p, f, x, cfg) - x * fp / p.alpha();
}

double apply_L_deriv_form(const StableParams& p, const Evaluand& f, double x, double a,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  if (!f.value || !f.derivative)
    throw PreconditionError("apply_L_deriv_form needs value and derivative");
  if (!(a > 0.0) || !std::isfinite(a)) throw PreconditionError("scale a must be positive");
  const double alpha = p.alpha();
  const double kp = 1.0 + p.delta(), km = 1.0 - p.delta();
  const double pref = std::pow(a, 1.0 - alpha) / alpha * 0.5 * d_alpha(alpha);
  auto q = [&](double u) { return kp * f.derivative(x + a * u) - km * f.derivative(x - a * u); };
  const double eps = cfg.inner_radius / a;

  double inner;
  if (alpha < 1.0) {
    const double e = 1.0 / (1.0 - alpha);
    const double scale = std::pow(eps, 1.0 - alpha) * e;
    auto g = [&](double w) { return w > 0.0 ? q(eps * std::pow(w, e)) * scale : 0.0; };
    inner = integrate_checked(g, 0.0, 1.0, cfg, "derivative form core");
  } else {
    auto g = [&](double u) { return u > 0.0 ? q(u) / u : 0.0; };
    inner = integrate_checked(g, 0.0, eps, cfg, "derivative form core");
  }

  const bool osc = f.far_field == FarField::kOscillatory;
  const double upper = (osc ? cfg.oscillatory_cutoff : cfg.far_field_start) / a;
  auto mid_integrand = [&](double u) { return q(u) * std::pow(u, -alpha); };
  auto pts = radial_breaks(eps, upper, f.features, x, a);
  const double mid = integrate_checked(mid_integrand, pts, cfg, "derivative form body");

  // Tail by parts: int_U^inf f'(x +- a u) u^-alpha du moves onto f.
  const double up = std::pow(upper, -alpha);
  double far = -(kp * f.value(x + a * upper) + km * f.value(x - a * upper)) * up / a;
  if (!osc) {
    auto g = [&](double u) { return kp * f.value(x + a * u) + km * f.value(x - a * u); };
    std::vector<double> feats = f.features;
    far += alpha / a *
           far_field_integral(g, upper, alpha, feats, x, a, cfg, "derivative form far field");
  }
  return pref * (inner + mid + far);
}

}  // namespace stablestein
