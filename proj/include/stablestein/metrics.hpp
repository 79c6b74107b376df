#pragma once

#include <string>
#include <vector>

#include "stablestein/stable_core.hpp"
#include "stablestein/test_functions.hpp"

namespace stablestein {

/// Sorted finite sample with a provenance tag.
class SampleSet {
 public:
  explicit SampleSet(std::vector<double> values, std::string tag = "");
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::string& tag() const noexcept { return tag_; }

 private:
  std::vector<double> values_;
  std::string tag_;
};

/// Default tolerances for CDF evaluations inside the KS statistic.
QuadratureConfig kolmogorov_cfg();

/// sup_x |F_n(x) - P(Z <= x)|, evaluated at the ECDF jump points with the
/// contour-inversion CDF.
double d_kol_empirical(const SampleSet& s, const StableParams& p, const QuadratureConfig& cfg = kolmogorov_cfg());

/// Standard deviation of sqrt(n) times the one-sample KS statistic under the
/// null, divided by sqrt(n).
double kolmogorov_se(std::size_t n);

/// Quantiles F^{-1}((i - 1/2)/n), i = 1..n.
SampleSet stratified_reference(const StableParams& p, std::size_t n);

/// Mean d_beta cost of the monotone (rank) coupling of two equal-size samples.
double d_wbeta_upper(const SampleSet& sf, const SampleSet& sz, double beta);

struct LowerEstimate {
  double value = 0.0;
  /// Standard error of the sample mean of the maximizing function.
  double std_error = 0.0;
  /// Largest standard error over the dictionary.
  double noise_envelope = 0.0;
  std::size_t argmax = 0;
  std::string argmax_name;
};

/// Appendix-style dictionary: smoothed steps h0(psi(x - c))/psi with
/// psi in {1, 2, 4, 8} and clamped distances min(d_beta(x, c), r), centred at
/// quantiles of the target law.
std::vector<TestFunction> hbeta_dictionary(const StableParams& p, double beta, std::size_t family_size);

/// max over the dictionary of |mean h(F) - E h(Z)|.
LowerEstimate d_wbeta_lower(const SampleSet& sf, const StableParams& p, double beta,
                            std::size_t family_size = 64, const QuadratureConfig& cfg = {});

/// Same with the dictionary rescaled to ||h||_inf + ||h'||_inf <= 1.
LowerEstimate d_fm_lower(const SampleSet& sf, const StableParams& p, double beta,
                         std::size_t family_size = 64, const QuadratureConfig& cfg = {});

/// (1 + sup p) sqrt(dwb).
double kol_from_wbeta(double dwb, const StableParams& p);

}  // namespace stablestein
