#pragma once

#include <functional>
#include <vector>

#include "stablestein/stable_core.hpp"

namespace stablestein {

/// How the Lévy integral treats |u| beyond the far-field radius.
enum class FarField {
  /// f grows at most like a small power: the tail is mapped to a finite
  /// interval with v = u^-alpha and integrated.
  kSmooth,
  /// f is bounded and oscillates: only the compensating -f(x) nu(|u| > U)
  /// term is kept, U = oscillatory_cutoff.
  kOscillatory,
};

/// A function the generator can act on. `derivative` is optional; when
/// present the Lévy core is Taylor-expanded instead of integrated.
struct Evaluand {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  FarField far_field = FarField::kSmooth;
  /// Points where f has kinks or narrow features; they become quadrature
  /// breakpoints at u = |z - x|.
  std::vector<double> features;
};

/// L f(x) = int (f(x+u) - f(x) - u f'(x) 1{|u|<1, alpha=1}) nu(du).
double apply_L(const StableParams& p, const Evaluand& f, double x, const QuadratureConfig& cfg = {});

/// A f(x) = L f(x) - x f'(x) / alpha.
double apply_A(const StableParams& p, const Evaluand& f, double x, const QuadratureConfig& cfg = {});

/// Derivative representation
///   alpha < 1:  (a^{1-alpha}/alpha) int u f'(x + a u) nu(du),
///   alpha = 1:  int u (f'(x + a u) - f'(x) 1{|u|<1}) nu(du).
/// Requires f.derivative.
double apply_L_deriv_form(const StableParams& p, const Evaluand& f, double x, double a,
                          const QuadratureConfig& cfg = {});

}  // namespace stablestein
