#include "stablestein/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "stablestein/stable_core.hpp"

namespace stablestein {

namespace {

using Fn = std::function<double(double)>;

double sgn(double x) { return (x > 0) - (x < 0); }

// Integral of f over [u, v]; long positive ranges are integrated in log x.
double integrate_piece(const Fn& f, double u, double v, const QuadratureConfig& cfg) {
  if (u > 0.0 && v / u > 8.0) {
    auto h = [&](double s) {
      const double x = std::exp(s);
      return f(x) * x;
    };
    const double lu = std::log(u), lv = std::log(v);
    std::vector<double> pts{lu};
    for (double s = std::ceil(lu / 4.0) * 4.0; s < lv; s += 4.0)
      if (s > lu) pts.push_back(s);
    pts.push_back(lv);
    return integrate_checked(h, pts, cfg, "stieltjes");
  }
  return integrate_checked(f, u, v, cfg, "stieltjes");
}

// Roots of dg inside (u, v) located from a sampled sign pattern.
std::vector<double> sign_changes(const Fn& dg, double u, double v) {
  constexpr int kSamples = 128;
  const bool logspaced = u > 0.0 && v / u > 8.0;
  auto at = [&](int i) {
    const double t = (i + 0.5) / kSamples;
    return logspaced ? u * std::pow(v / u, t) : u + (v - u) * t;
  };
  std::vector<double> roots;
  double xp = at(0), fp = dg(xp);
  for (int i = 1; i < kSamples; ++i) {
    const double x = at(i), f = dg(x);
    if (fp != 0.0 && f != 0.0 && sgn(f) != sgn(fp)) {
      boost::uintmax_t iters = 200;
      auto r = boost::math::tools::toms748_solve(dg, xp, x, fp, f,
                                                 boost::math::tools::eps_tolerance<double>(50), iters);
      roots.push_back(0.5 * (r.first + r.second));
    }
    xp = x;
    fp = f;
  }
  return roots;
}

// Common inputs of the theorem terms.
struct Measures {
  const AttractionModel& m;
  double a;
  // g1 = eps/|x|^a, g2 = x eps'/|x|^a and their derivatives.
  double g1(double x) const { return m.eps(x) * std::pow(std::abs(x), -a); }
  double dg1(double x) const {
    const double ax = std::abs(x);
    return m.eps_derivative(x) * std::pow(ax, -a) - a * sgn(x) * m.eps(x) * std::pow(ax, -a - 1.0);
  }
  double g2(double x) const { return x * m.eps_derivative(x) * std::pow(std::abs(x), -a); }
  double dg2(double x) const {
    return ((1.0 - a) * m.eps_derivative(x) + x * m.eps_second_derivative(x)) * std::pow(std::abs(x), -a);
  }
};

// int over |x| in [lo, hi] of w(|x|) |dg| summed over both half lines.
double two_sided(const Measures& ms, bool second, const Fn& w, double lo, double hi, const QuadratureConfig& cfg) {
  double total = 0.0;
  for (double side : {1.0, -1.0}) {
    Fn g = [&, side](double x) { return second ? ms.g2(side * x) : ms.g1(side * x); };
    Fn dg = [&, side](double x) { return side * (second ? ms.dg2(side * x) : ms.dg1(side * x)); };
    std::vector<double> br;
    for (double b : ms.m.breakpoints())
      if (side * b > lo && side * b < hi) br.push_back(side * b);
    total += stieltjes_variation(g, dg, w, lo, hi, br, cfg);
  }
  return total;
}

// Upper end of the mapped far field for decay rate `rate` in log x.
double far_end(double M, double rate) {
  const double span = std::min(std::log(1e300 / M), 40.0 / std::max(rate, 1e-3));
  return M * std::exp(span);
}

double resolve_beta(const AttractionModel& m, const BoundConfig& cfg) {
  const double beta = cfg.beta > 0.0 ? cfg.beta : 0.5 * m.alpha();
  if (!(beta < m.alpha())) throw PreconditionError("bound needs beta < alpha");
  return beta;
}

void refuse_outside_domain(const AttractionModel& m) {
  if (!m.in_domain())
    throw PreconditionError("model " + m.id() + " is not in the domain of normal attraction; use the log-tail rate");
}

// int_1^M x^{q-1} dx.
double power_integral(double q, double M) {
  const double lm = std::log(M);
  return q == 0.0 ? lm : std::expm1(q * lm) / q;
}

}  // namespace

double stieltjes_variation(const Fn& g, const Fn& dg, const Fn& w, double a, double b, std::vector<double> breaks,
                           const QuadratureConfig& cfg) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts{a, b};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    std::vector<double> sub{pts[i]};
    for (double r : sign_changes(dg, pts[i], pts[i + 1])) sub.push_back(r);
    sub.push_back(pts[i + 1]);
    for (std::size_t j = 0; j + 1 < sub.size(); ++j)
      total += integrate_piece([&](double x) { return w(x) * std::abs(dg(x)); }, sub[j], sub[j + 1], cfg);
  }
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double x = pts[i];
    const double wx = w(x);
    if (wx == 0.0) continue;
    const double h = x == 0.0 ? 1e-13 : 1e-13 * std::abs(x);
    total += wx * std::abs(g(x + h) - g(x - h));
  }
  return total;
}

BoundBreakdown bound_alpha_lt1(const AttractionModel& m, double n, const BoundConfig& cfg) {
  refuse_outside_domain(m);
  const double a = m.alpha();
  if (!(a < 1.0)) throw PreconditionError("bound_alpha_lt1 needs alpha < 1");
  if (!(n >= 1.0)) throw PreconditionError("bound needs n >= 1");
  const double beta = resolve_beta(m, cfg);
  const double d = m.delta();
  const double M = sigma_of(m) * std::pow(n, 1.0 / a);
  const double lead = std::pow(n, (a - 1.0) / a);
  BoundBreakdown out;
  out.n = n;
  out.model_id = m.id();
  out.t1 = 1.0 / n;
  const bool closed = !cfg.generic && M >= 1.0 &&
                      (m.family() == ModelFamily::kPareto || m.family() == ModelFamily::kMixed);
  double c;  // constant inside the remainder sup
  double eps_at_M;
  if (closed) {
    const double A = m.A();
    const bool mixed = m.family() == ModelFamily::kMixed;
    const double At = mixed ? m.A_tilde() : 0.0, b = m.alpha_tilde();
    double v2 = A * a;
    if (mixed) v2 += At * b * power_integral(1.0 + a - b, M);
    out.t2 = std::pow(n, -1.0 / a) * 2.0 * v2;
    out.t3 = mixed ? std::pow(n, (a - beta) / a) * 2.0 * At * b * (1.0 + b - a) * std::pow(M, beta - b) / (b - beta)
                   : 0.0;
    double J = 0.5 - A / (1.0 - a);
    if (mixed) J += At * power_integral(1.0 - b, M);
    c = lead * 2.0 * d * J;
    eps_at_M = mixed ? At * std::pow(M, a - b) : 0.0;
    out.remainder = std::max(std::abs(c), std::abs(eps_at_M + c));
    out.closed_form = true;
  } else {
    Measures ms{m, a};
    const auto& q = cfg.quad;
    out.t2 = std::pow(n, -1.0 / a) *
             two_sided(ms, false, [&](double x) { return std::pow(x, 1.0 + a); }, 0.0, M, q);
    const double hi = far_end(M, a - beta);
    const Fn wb = [&](double x) { return std::pow(x, beta); };
    out.t3 = std::pow(n, (a - beta) / a) * (two_sided(ms, true, wb, M, hi, q) + two_sided(ms, false, wb, M, hi, q));
    // J_+- with x = u^{1/(1-a)} on [0, 1], which removes the x^-a singularity.
    auto J = [&](double side) {
      const double e = 1.0 / (1.0 - a);
      auto inner = [&](double u) {
        if (u == 0.0) return 0.0;
        const double x = std::pow(u, e);
        return m.eps(side * x) * e;
      };
      double v = integrate_checked(inner, 0.0, std::min(1.0, M), q, "remainder");
      if (M > 1.0) {
        std::vector<double> br{1.0, M};
        for (double b : m.breakpoints())
          if (side * b > 1.0 && side * b < M) br.push_back(side * b);
        std::sort(br.begin(), br.end());
        auto outer = [&](double x) { return m.eps(side * x) * std::pow(x, -a); };
        for (std::size_t i = 0; i + 1 < br.size(); ++i) v += integrate_piece(outer, br[i], br[i + 1], q);
      }
      return v;
    };
    c = lead * ((1.0 + d) * J(1.0) - (1.0 - d) * J(-1.0));
    double sup = std::abs(c);  // limit |x| -> infinity, eps vanishes there
    for (int i = 0; i <= cfg.sup_grid; ++i) {
      const double x = M * std::pow(cfg.sup_span, static_cast<double>(i) / cfg.sup_grid);
      sup = std::max({sup, std::abs(m.eps(x) + c), std::abs(m.eps(-x) + c)});
    }
    out.remainder = sup;
  }
  out.total = out.t1 + out.t2 + out.t3 + out.remainder;
  return out;
}

BoundBreakdown bound_alpha_eq1(const AttractionModel& m, double n, const BoundConfig& cfg) {
  refuse_outside_domain(m);
  if (m.alpha() != 1.0 || m.delta() != 0.0) throw PreconditionError("bound_alpha_eq1 needs alpha = 1, delta = 0");
  if (!(n >= 1.0)) throw PreconditionError("bound needs n >= 1");
  const double beta = resolve_beta(m, cfg);
  const double M = sigma_of(m) * n;
  const double lm = std::log(M), ln = std::log(n);
  BoundBreakdown out;
  out.n = n;
  out.model_id = m.id();
  out.t1 = ln * ln / n;
  const bool closed = !cfg.generic && M >= 1.0 &&
                      (m.family() == ModelFamily::kPareto || m.family() == ModelFamily::kMixed);
  if (closed) {
    const bool mixed = m.family() == ModelFamily::kMixed;
    double v2 = m.A() * (3.0 + lm);
    if (mixed) {
      // int_1^M x^p (2 + log M - log x) dx with p = 1 - alpha_tilde.
      const double b = m.alpha_tilde(), q = 2.0 - b;
      const double i0 = power_integral(q, M);
      const double i1 = q == 0.0 ? 0.5 * lm * lm : (std::exp(q * lm) * (lm / q - 1.0 / (q * q)) + 1.0 / (q * q));
      v2 += m.A_tilde() * b * ((2.0 + lm) * i0 - i1);
      const double b2 = b * b;
      out.t3 = std::pow(n, 1.0 - beta) * 2.0 * m.A_tilde() * b2 * std::pow(M, beta - b) / (b - beta);
    }
    out.t2 = 2.0 * v2 / n;
    out.remainder = 0.0;
    out.closed_form = true;
  } else {
    Measures ms{m, 1.0};
    const auto& q = cfg.quad;
    out.t2 = two_sided(ms, false, [&](double x) { return x * x * (2.0 - std::log(x / M)); }, 0.0, M, q) / n;
    const double hi = far_end(M, 1.0 - beta);
    const Fn wb = [&](double x) { return std::pow(x, beta); };
    out.t3 = std::pow(n, 1.0 - beta) * (two_sided(ms, true, wb, M, hi, q) + two_sided(ms, false, wb, M, hi, q));
    auto diff = [&](double x) { return x == 0.0 ? 0.0 : (m.eps(x) - m.eps(-x)) / x; };
    bool symmetric = true;
    for (int i = -200; i <= 200 && symmetric; ++i) {
      const double x = M * std::pow(10.0, i / 20.0);
      symmetric = m.eps(x) == m.eps(-x);
    }
    double r = 0.0;
    if (!symmetric) {
      std::vector<double> br{0.0, M};
      for (double b : m.breakpoints())
        if (std::abs(b) > 0.0 && std::abs(b) < M) br.push_back(std::abs(b));
      std::sort(br.begin(), br.end());
      br.erase(std::unique(br.begin(), br.end()), br.end());
      for (std::size_t i = 0; i + 1 < br.size(); ++i) r += integrate_piece(diff, br[i], br[i + 1], q);
    }
    out.remainder = ln * ln / n * std::abs(r);
  }
  out.total = out.t1 + out.t2 + out.t3 + out.remainder;
  return out;
}

BoundBreakdown theorem_bound(const AttractionModel& m, double n, const BoundConfig& cfg) {
  return m.alpha() < 1.0 ? bound_alpha_lt1(m, n, cfg) : bound_alpha_eq1(m, n, cfg);
}

BoundBreakdown bound_appendixB(double alpha, double n) {
  const double g = gamma_n(alpha, n);
  const double lg = std::log(g);
  BoundBreakdown out;
  out.n = n;
  out.model_id = AttractionModel::logtail(alpha).id();
  out.t1 = 1.0 / lg;
  if (alpha < 1.0) {
    out.t2 = std::pow(n, 1.0 / alpha - 1.0) / g;
  } else {
    const double ln = std::log(n);
    out.t2 = lg / g;
    out.t3 = ln * ln / n;
  }
  out.closed_form = true;
  out.total = out.t1 + out.t2 + out.t3;
  return out;
}

RateModel rate_model_from_name(const std::string& name) {
  if (name == "power") return RateModel::kPower;
  if (name == "power_times_logsq") return RateModel::kPowerTimesLogSq;
  if (name == "inverse_log") return RateModel::kInverseLog;
  throw PreconditionError("unknown rate model '" + name + "'");
}

std::string rate_model_name(RateModel r) {
  switch (r) {
    case RateModel::kPower: return "power";
    case RateModel::kPowerTimesLogSq: return "power_times_logsq";
    case RateModel::kInverseLog: return "inverse_log";
  }
  return "";
}

RateFit rate_fit(const std::vector<double>& n, const std::vector<double>& b, RateModel model) {
  if (n.size() != b.size()) throw PreconditionError("rate_fit needs equal lengths");
  if (n.size() < 4) throw PreconditionError("rate_fit needs at least 4 points");
  std::vector<double> t(n.size()), y(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 1.0 && b[i] > 0.0 && std::isfinite(b[i])))
      throw PreconditionError("rate_fit needs n > 1 and finite positive values");
    if (i > 0 && !(n[i] > n[i - 1])) throw PreconditionError("rate_fit needs increasing n");
    const double ln = std::log(n[i]);
    switch (model) {
      case RateModel::kPower: t[i] = ln; y[i] = std::log(b[i]); break;
      case RateModel::kPowerTimesLogSq: t[i] = ln; y[i] = std::log(b[i] / (ln * ln)); break;
      case RateModel::kInverseLog: t[i] = std::log(ln); y[i] = std::log(b[i]); break;
    }
  }
  const double k = static_cast<double>(n.size());
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < t.size(); ++i) { mt += t[i]; my += y[i]; }
  mt /= k;
  my /= k;
  double stt = 0, sty = 0, syy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  RateFit fit;
  if (stt <= 0.0 || syy <= 1e-24 * std::max(1.0, my * my) * k) {
    fit.degenerate = true;
    fit.intercept = my;
    return fit;
  }
  fit.slope = sty / stt;
  fit.intercept = my - fit.slope * mt;
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * t[i];
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / k);
  return fit;
}

namespace {
BoundCurve finish_curve(std::vector<BoundBreakdown> terms, RateModel model) {
  BoundCurve c;
  c.fitted_slope = c.fit_residual = std::numeric_limits<double>::quiet_NaN();
  for (const auto& t : terms) {
    c.n_values.push_back(t.n);
    c.bound_values.push_back(t.total);
  }
  c.terms = std::move(terms);
  if (c.n_values.size() >= 4) {
    const auto fit = rate_fit(c.n_values, c.bound_values, model);
    c.fitted_slope = fit.slope;
    c.fit_residual = fit.residual;
  }
  return c;
}
}  // namespace

BoundCurve bound_curve(const AttractionModel& m, const std::vector<double>& n_values, RateModel model,
                       const BoundConfig& cfg) {
  std::vector<BoundBreakdown> terms;
  for (double n : n_values) terms.push_back(theorem_bound(m, n, cfg));
  return finish_curve(std::move(terms), model);
}

BoundCurve appendixB_curve(double alpha, const std::vector<double>& n_values, RateModel model) {
  std::vector<BoundBreakdown> terms;
  for (double n : n_values) terms.push_back(bound_appendixB(alpha, n));
  return finish_curve(std::move(terms), model);
}

std::vector<double> decades(int lo, int hi) {
  std::vector<double> out;
  for (int k = lo; k <= hi; ++k) out.push_back(std::pow(10.0, k));
  return out;
}

}  // namespace stablestein
