#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace stablestein {

/// |x - y| ∧ |x - y|^beta.
double d_beta(double x, double y, double beta);

/// A test function h with its a.e. derivative and the points where h or h'
/// is not smooth. `growth` bounds |h(x)| = O(|x|^growth).
struct TestFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::vector<double> breakpoints;
  double growth = 0.0;
  /// False when h' is unbounded near a breakpoint; derivative-based
  /// representations are then not used.
  bool derivative_regular = true;
  /// sup |h|; infinity when unbounded.
  double sup_norm = std::numeric_limits<double>::infinity();
};

TestFunction constant_function(double c);
/// max(-1, min(1, x)). 1-Lipschitz; lies in 2 H_beta, not H_beta.
TestFunction clamp_identity();
/// d_beta(x, 0) = |x| ∧ |x|^beta.
TestFunction dbeta_abs(double beta);
TestFunction half_tanh();
/// exp(-x^2/2) / 2.
TestFunction gaussian_bump();
/// h0(psi (x - x0)) / psi with h0 the unit ramp from 1 down to 0 on [0, 1].
TestFunction ramp_step(double x0, double psi);
/// min(d_beta(x, c), r).
TestFunction clamped_distance(double c, double r, double beta);
/// min(1, |x|^gamma). Hölder but not Lipschitz at 0.
TestFunction power_min(double gamma);

/// Builds a named function: constant, clamp-id, dbeta-abs, half-tanh, bump,
/// ramp-step, power-min.
TestFunction test_function_by_name(const std::string& name, double beta);
std::vector<std::string> test_function_names();

struct MembershipReport {
  /// max |h(x) - h(y)| / d_beta(x, y) over the sampled pairs.
  double max_ratio = 0.0;
  std::size_t pairs = 0;
  bool member = false;
};

/// Randomized check of |h(x) - h(y)| <= d_beta(x, y) up to a rounding slack
/// of 1e-13 max(1, |x|).
MembershipReport check_membership(const TestFunction& h, double beta, std::size_t pairs = 10000,
                                  std::uint64_t seed = 7);

}  // namespace stablestein
