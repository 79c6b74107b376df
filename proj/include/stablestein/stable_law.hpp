#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "stablestein/stable_core.hpp"

namespace stablestein {

/// Tabulated unit-time law: log-density on a uniform grid in xi = asinh(y)
/// with sixth-order Lagrange interpolation, plus a fixed product rule for
/// expectations E g(a Z + b). Instances are immutable once built and shared
/// through `get`.
class StableLaw {
 public:
  static std::shared_ptr<const StableLaw> get(const StableParams& p);
  explicit StableLaw(const StableParams& p);

  const StableParams& params() const noexcept { return params_; }

  double pdf(double y) const;
  double cdf(double y) const;
  double quantile(double u) const;
  double sup_density() const noexcept { return sup_pdf_; }

  /// E g(a Z + b). `features` are points in the argument of g where g has a
  /// kink or a narrow feature; quadrature panels are split there.
  /// `growth` is an exponent g with |g(z)| = O(|z|^growth), growth < alpha.
  /// The rule is fixed, so g should not oscillate on the scale of the tails.
  double expect(const std::function<double(double)>& g, double a, double b,
                std::span<const double> features = {}, double growth = 0.0) const;

  /// Nodes and weights of the unsplit product rule (for tests and diagnostics).
  std::size_t rule_size(double growth = 0.0) const;

 private:
  struct Panel {
    double lo, hi;
    std::size_t first;  // index of first node
  };

  double log_pdf_xi(double xi) const;
  double pdf_xi_weight(double xi) const;  // p(sinh xi) cosh xi
  void build_cdf() const;
  std::pair<std::size_t, std::size_t> panel_range(double growth) const;

  double to_xi(double y) const { return std::asinh(y / scale_); }
  double to_y(double xi) const { return scale_ * std::sinh(xi); }

  StableParams params_;
  double scale_;
  double xi_max_;
  double xi_cap_ = 0.0;
  double h_;
  std::vector<double> logp_;
  // Tail expansion c |y|^{-1-alpha} (1 + kappa |y|^-alpha) beyond the grid.
  double c_hi_, c_lo_, kappa_hi_, kappa_lo_;
  double sup_pdf_ = 0.0;

  std::vector<Panel> panels_;
  std::vector<double> node_y_, node_w_;

  // log P(Z > sinh(j h)) and log P(Z < -sinh(j h)), j = 0..M, built on first use.
  mutable std::once_flag cdf_once_;
  mutable std::vector<double> log_up_, log_lo_;
  mutable double tail_kappa_hi_ = 0.0, tail_kappa_lo_ = 0.0;
  double f0_ = 0.5;
};

}  // namespace stablestein
