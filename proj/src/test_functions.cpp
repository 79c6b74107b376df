#include "stablestein/test_functions.hpp"

#include <algorithm>
#include <cmath>

#include "stablestein/quadrature.hpp"
#include "stablestein/stable_core.hpp"

namespace stablestein {

double d_beta(double x, double y, double beta) {
  const double w = std::abs(x - y);
  return std::min(w, std::pow(w, beta));
}

TestFunction constant_function(double c) {
  return {"constant", [c](double) { return c; }, [](double) { return 0.0; }, {}, 0.0, true, std::abs(c)};
}

TestFunction clamp_identity() {
  return {"clamp-id",
          [](double x) { return std::clamp(x, -1.0, 1.0); },
          [](double x) { return std::abs(x) < 1.0 ? 1.0 : 0.0; },
          {-1.0, 1.0},
          0.0,
          true,
          1.0};
}

TestFunction dbeta_abs(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw PreconditionError("dbeta-abs needs beta in (0, 1]");
  return {"dbeta-abs",
          [beta](double x) { return d_beta(x, 0.0, beta); },
          [beta](double x) {
            const double a = std::abs(x), s = (x > 0) - (x < 0);
            return a < 1.0 ? s : s * beta * std::pow(a, beta - 1.0);
          },
          {-1.0, 0.0, 1.0},
          beta,
          true};
}

TestFunction half_tanh() {
  return {"half-tanh",
          [](double x) { return 0.5 * std::tanh(x); },
          [](double x) {
            const double c = std::cosh(x);
            return 0.5 / (c * c);
          },
          {-2.0, -1.0, 0.0, 1.0, 2.0},
          0.0,
          true,
          0.5};
}

TestFunction gaussian_bump() {
  return {"bump",
          [](double x) { return 0.5 * std::exp(-0.5 * x * x); },
          [](double x) { return -0.5 * x * std::exp(-0.5 * x * x); },
          {-3.0, -1.5, -0.5, 0.5, 1.5, 3.0},
          0.0,
          true,
          0.5};
}

TestFunction ramp_step(double x0, double psi) {
  if (!(psi >= 1.0)) throw PreconditionError("ramp-step needs psi >= 1");
  return {"ramp-step",
          [x0, psi](double x) { return std::clamp(1.0 - psi * (x - x0), 0.0, 1.0) / psi; },
          [x0, psi](double x) {
            const double s = psi * (x - x0);
            return s > 0.0 && s < 1.0 ? -1.0 : 0.0;
          },
          {x0, x0 + 1.0 / psi},
          0.0,
          true,
          1.0 / psi};
}

TestFunction clamped_distance(double c, double r, double beta) {
  if (!(r > 0.0)) throw PreconditionError("clamped distance needs r > 0");
  // Level r is reached where |x - c| equals r (r <= 1) or r^{1/beta} (r > 1).
  const double reach = r <= 1.0 ? r : std::pow(r, 1.0 / beta);
  std::vector<double> bp{c - reach, c, c + reach};
  if (reach > 1.0) {
    bp.push_back(c - 1.0);
    bp.push_back(c + 1.0);
  }
  std::sort(bp.begin(), bp.end());
  return {"clamped-distance",
          [c, r, beta](double x) { return std::min(d_beta(x, c, beta), r); },
          [c, r, beta, reach](double x) {
            const double w = std::abs(x - c), s = (x > c) - (x < c);
            if (w >= reach) return 0.0;
            return w < 1.0 ? s : s * beta * std::pow(w, beta - 1.0);
          },
          bp,
          0.0,
          true,
          r};
}

TestFunction power_min(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw PreconditionError("power-min needs gamma in (0, 1)");
  return {"power-min",
          [gamma](double x) { return std::min(1.0, std::pow(std::abs(x), gamma)); },
          [gamma](double x) {
            const double a = std::abs(x), s = (x > 0) - (x < 0);
            return a < 1.0 && a > 0.0 ? s * gamma * std::pow(a, gamma - 1.0) : 0.0;
          },
          {-1.0, 0.0, 1.0},
          0.0,
          false,
          1.0};
}

TestFunction test_function_by_name(const std::string& name, double beta) {
  if (name == "constant") return constant_function(1.0);
  if (name == "clamp-id") return clamp_identity();
  if (name == "dbeta-abs") return dbeta_abs(beta);
  if (name == "half-tanh") return half_tanh();
  if (name == "bump") return gaussian_bump();
  if (name == "ramp-step") return ramp_step(0.3, 2.0);
  if (name == "power-min") return power_min(beta);
  throw PreconditionError("unknown test function '" + name + "'");
}

std::vector<std::string> test_function_names() {
  return {"constant", "clamp-id", "dbeta-abs", "half-tanh", "bump", "ramp-step", "power-min"};
}

MembershipReport check_membership(const TestFunction& h, double beta, std::size_t pairs,
                                  std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> pos(-10.0, 10.0), lw(-8.0, 3.0);
  MembershipReport r;
  r.pairs = pairs;
  bool violated = false;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double x = pos(rng);
    const double w = std::pow(10.0, lw(rng)) * (i % 2 ? 1.0 : -1.0);
    const double y = x + w;
    const double d = d_beta(x, y, beta);
    if (d <= 0.0) continue;
    const double dh = std::abs(h.value(x) - h.value(y));
    r.max_ratio = std::max(r.max_ratio, dh / d);
    // Absolute slack: at |w| = 1e-8 rounding in h alone moves the ratio by 1e-8.
    if (dh > d + 1e-13 * std::max(1.0, std::abs(x))) violated = true;
  }
  r.member = !violated;
  return r;
}

}  // namespace stablestein
