#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stablestein {

/// Tolerances and limits shared by every adaptive integration in the library.
struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int max_subdivisions = 20000;
  /// Lévy integrals of oscillatory evaluands are truncated at this |u|.
  double oscillatory_cutoff = 1e4;
  /// Radius of the Taylor-expanded core of the Lévy integral.
  double inner_radius = 1e-3;
  /// Start of the v = u^-alpha mapped far field for smooth evaluands.
  double far_field_start = 1e2;

  void validate() const;
};

/// Raised when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Adaptive integration stopped before reaching its tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(std::string stage, double value, double error_estimate);
  const std::string& stage() const noexcept { return stage_; }
  double value() const noexcept { return value_; }
  double error_estimate() const noexcept { return error_; }

 private:
  std::string stage_;
  double value_;
  double error_;
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
  long evaluations = 0;
  bool converged = false;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 21-point Gauss-Kronrod over [pts.front(), pts.back()].
/// Interior points are initial subdivision boundaries. Intervals with the
/// largest error estimate are bisected until the total error is below
/// max(abs_tol, rel_tol*|I|) or max_subdivisions is exhausted.
QuadResult integrate_adaptive(const Integrand& f, std::span<const double> pts,
                              const QuadratureConfig& cfg);
QuadResult integrate_adaptive(const Integrand& f, double a, double b,
                              const QuadratureConfig& cfg);

/// Same, but throws NumericalFailure tagged with `stage` on non-convergence.
double integrate_checked(const Integrand& f, std::span<const double> pts,
                         const QuadratureConfig& cfg, std::string_view stage);
double integrate_checked(const Integrand& f, double a, double b,
                         const QuadratureConfig& cfg, std::string_view stage);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss_legendre(int n);

}  // namespace stablestein
