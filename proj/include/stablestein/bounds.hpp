#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stablestein/gclt.hpp"
#include "stablestein/quadrature.hpp"

namespace stablestein {

/// Terms of the normal-attraction upper bound at one n. Every value is the
/// bound up to the unspecified multiplicative constant, which is set to 1.
///   alpha < 1: t1 = 1/n, t2 = n^{-1/a} int_{|x|<M} |x|^{1+a} |d(eps/|x|^a)|,
///              t3 = n^{(a-b)/a} int_{|x|>=M} |x|^b (|d(x eps'/|x|^a)| + |d(eps/|x|^a)|),
///              remainder = sup_{|x|>=M} |eps(x) + n^{(a-1)/a}((1+d) J_+ - (1-d) J_-)|,
///              J_+- = int_0^M eps(+-x) x^-a dx, M = sigma n^{1/a}.
///   alpha = 1: t1 = (log n)^2/n, t2 = n^-1 int_{|x|<M} x^2 (2 - log|x/M|) |d(eps/|x|)|,
///              t3 as above with a = 1, remainder = n^-1 (log n)^2 |int_0^M (eps(x) - eps(-x))/x dx|.
/// For the log-tail law: t1 = 1/log gamma_n, t2 = n^{1/a-1}/gamma_n (a < 1) or
/// log(gamma_n)/gamma_n (a = 1), t3 = 0 (a < 1) or (log n)^2/n (a = 1).
struct BoundBreakdown {
  double n = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double remainder = 0.0;
  double total = 0.0;
  std::string model_id;
  bool closed_form = false;
};

struct BoundConfig {
  /// Distance exponent; values <= 0 select beta = alpha / 2.
  double beta = 0.0;
  /// Force the generic Stieltjes quadrature for built-in models.
  bool generic = false;
  /// Grid for the sup in the alpha < 1 remainder: log-spaced over [M, span M].
  int sup_grid = 400;
  double sup_span = 1e4;
  QuadratureConfig quad = default_quad();

  static QuadratureConfig default_quad() {
    QuadratureConfig q;
    q.rel_tol = 1e-11;
    q.abs_tol = 1e-14;
    return q;
  }
};

/// int_a^b w(x) |g'(x)| dx plus w |jump of g| at interior breaks, with [a, b]
/// split at breaks and at sign changes of g' so every piece is monotone.
double stieltjes_variation(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                           const std::function<double(double)>& w, double a, double b,
                           std::vector<double> breaks, const QuadratureConfig& cfg);

BoundBreakdown bound_alpha_lt1(const AttractionModel& m, double n, const BoundConfig& cfg = {});
BoundBreakdown bound_alpha_eq1(const AttractionModel& m, double n, const BoundConfig& cfg = {});
/// Dispatches on alpha. Refuses models outside the domain of normal attraction.
BoundBreakdown theorem_bound(const AttractionModel& m, double n, const BoundConfig& cfg = {});
/// Rate expression for the log-tail law. Requires n >= 3.
BoundBreakdown bound_appendixB(double alpha, double n);

enum class RateModel { kPower, kPowerTimesLogSq, kInverseLog };
RateModel rate_model_from_name(const std::string& name);
std::string rate_model_name(RateModel r);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root mean square residual in the transformed coordinates.
  double residual = 0.0;
  bool degenerate = false;
};

/// Least squares in transformed coordinates:
///   power            log b against log n,
///   power_times_logsq log(b/(log n)^2) against log n,
///   inverse_log      log b against log log n.
RateFit rate_fit(const std::vector<double>& n, const std::vector<double>& b, RateModel model);

struct BoundCurve {
  std::vector<double> n_values;
  std::vector<double> bound_values;
  std::vector<BoundBreakdown> terms;
  /// NaN with fewer than 4 points.
  double fitted_slope = 0.0;
  double fit_residual = 0.0;
};

BoundCurve bound_curve(const AttractionModel& m, const std::vector<double>& n_values, RateModel model,
                       const BoundConfig& cfg = {});
BoundCurve appendixB_curve(double alpha, const std::vector<double>& n_values, RateModel model);

/// 10^lo, 10^{lo+1}, ..., 10^hi.
std::vector<double> decades(int lo, int hi);

}  // namespace stablestein
