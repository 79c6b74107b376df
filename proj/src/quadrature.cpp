#include "stablestein/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace stablestein {

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw PreconditionError("quadrature tolerances must be positive");
  if (max_subdivisions < 1)
    throw PreconditionError("max_subdivisions must be at least 1");
  if (!(oscillatory_cutoff > 0.0) || !(inner_radius > 0.0) || !(far_field_start > 0.0))
    throw PreconditionError("quadrature radii must be positive");
  if (inner_radius >= far_field_start)
    throw PreconditionError("inner_radius must be below far_field_start");
}

NumericalFailure::NumericalFailure(std::string stage, double value, double error_estimate)
    : std::runtime_error("numerical failure in " + stage + ": error estimate " +
                         std::to_string(error_estimate) + " for value " + std::to_string(value)),
      stage_(std::move(stage)),
      value_(value),
      error_(error_estimate) {}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
using G10 = boost::math::quadrature::gauss<double, 10>;

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// One GK21 panel. The center is a Kronrod-only node for the 10-point Gauss rule.
Segment gk21(const Integrand& f, double a, double b) {
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G10::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double kron = fc * wk[0], gauss = 0.0, l1 = std::abs(fc) * wk[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    double fp = f(c + h * xk[i]), fm = f(c - h * xk[i]);
    kron += (fp + fm) * wk[i];
    l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
    if (i % 2 == 1) gauss += (fp + fm) * wg[i / 2];
  }
  Segment s{a, b, kron * h, std::abs((kron - gauss) * h)};
  if (!std::isfinite(s.value)) s.error = std::numeric_limits<double>::infinity();
  s.error = std::max(s.error, 50.0 * std::numeric_limits<double>::epsilon() * l1 * std::abs(h));
  return s;
}

}  // namespace

QuadResult integrate_adaptive(const Integrand& f, std::span<const double> pts,
                              const QuadratureConfig& cfg) {
  QuadResult r;
  if (pts.size() < 2) return r;
  std::priority_queue<Segment> heap;
  double total = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    Segment s = gk21(f, pts[i], pts[i + 1]);
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  r.evaluations = 21L * static_cast<long>(heap.size());
  int subdivisions = static_cast<int>(heap.size());
  auto done = [&] { return err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };
  while (!heap.empty() && !done() && subdivisions < cfg.max_subdivisions) {
    Segment s = heap.top();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) break;
    heap.pop();
    Segment l = gk21(f, s.a, mid), u = gk21(f, mid, s.b);
    total += l.value + u.value - s.value;
    err += l.error + u.error - s.error;
    heap.push(l);
    heap.push(u);
    r.evaluations += 42;
    ++subdivisions;
    // Resum now and then so cancellation in the running totals cannot drift.
    if (subdivisions % 256 == 0) {
      auto copy = heap;
      total = err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        err += copy.top().error;
        copy.pop();
      }
    }
  }
  auto copy = std::move(heap);
  total = err = 0.0;
  while (!copy.empty()) {
    total += copy.top().value;
    err += copy.top().error;
    copy.pop();
  }
  r.value = total;
  r.abs_error = err;
  r.subdivisions = subdivisions;
  r.converged = std::isfinite(total) && done();
  return r;
}

QuadResult integrate_adaptive(const Integrand& f, double a, double b, const QuadratureConfig& cfg) {
  const double pts[2] = {a, b};
  return integrate_adaptive(f, std::span<const double>(pts, 2), cfg);
}

double integrate_checked(const Integrand& f, std::span<const double> pts,
                         const QuadratureConfig& cfg, std::string_view stage) {
  QuadResult r = integrate_adaptive(f, pts, cfg);
  if (!r.converged) throw NumericalFailure(std::string(stage), r.value, r.abs_error);
  return r.value;
}

double integrate_checked(const Integrand& f, double a, double b, const QuadratureConfig& cfg,
                         std::string_view stage) {
  const double pts[2] = {a, b};
  return integrate_checked(f, std::span<const double>(pts, 2), cfg, stage);
}

namespace {
template <int N>
GaussRule make_rule() {
  using R = boost::math::quadrature::gauss<double, N>;
  GaussRule g;
  const auto& x = R::abscissa();
  const auto& w = R::weights();
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    g.x.push_back(-x[i]);
    g.w.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.x.push_back(x[i]);
    g.w.push_back(w[i]);
  }
  return g;
}
}  // namespace

const GaussRule& gauss_legendre(int n) {
  static const GaussRule r8 = make_rule<8>();
  static const GaussRule r12 = make_rule<12>();
  static const GaussRule r16 = make_rule<16>();
  static const GaussRule r20 = make_rule<20>();
  switch (n) {
    case 8: return r8;
    case 12: return r12;
    case 16: return r16;
    case 20: return r20;
    default: throw PreconditionError("gauss_legendre: supported orders are 8, 12, 16, 20");
  }
}

}  // namespace stablestein
