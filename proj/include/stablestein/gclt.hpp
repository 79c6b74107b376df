#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stablestein/metrics.hpp"
#include "stablestein/quadrature.hpp"

namespace stablestein {

enum class ModelFamily { kPareto, kMixed, kLogTail, kKnots };

/// One interpolation node of a user supplied perturbation.
struct EpsKnot {
  double x;
  double eps;
  double deps;
};

/// Law of X with tails
///   P(X > x)  = (A + eps(x))  (1 + delta) / x^alpha,
///   P(X < -x) = (A + eps(-x)) (1 - delta) / x^alpha,   x > 0.
/// Every family puts no mass strictly inside (-x0, x0), where x0 = 1 except
/// for the log-tail law (x0 = e).
class AttractionModel {
 public:
  /// P(X > x) = (1 + delta) / (2 x^alpha) for x >= 1.
  static AttractionModel pareto(double alpha, double delta);
  /// P(X > x) = (A x^-alpha + At x^-at)(1 + delta) for x >= 1, A + At = 1/2.
  static AttractionModel mixed(double alpha, double alpha_tilde, double A, double A_tilde, double delta);
  /// Symmetric density c log|x| / |x|^{1+alpha} on |x| >= e with
  /// c = alpha^2 e^alpha / (2 (1 + alpha)). Not in the domain of normal attraction.
  static AttractionModel logtail(double alpha);
  /// eps given by cubic Hermite interpolation through knots with |x| >= 1.
  /// Each side needs a knot at +-1 with eps = 1/2 - A. A side without knots
  /// mirrors the other. Beyond the outermost knot eps continues as the C^1
  /// power law eps_k (|x|/|x_k|)^p.
  static AttractionModel from_knots(double alpha, double delta, double A, std::vector<EpsKnot> knots);
  /// {"family": "pareto" | "mixed" | "logtail" | "knots", "alpha": .., "delta": .., ...}.
  static AttractionModel from_json(const std::string& text);

  ModelFamily family() const noexcept { return family_; }
  /// Short identifier used in reports, e.g. "pareto(a=0.5,d=0)".
  std::string id() const;
  double alpha() const noexcept { return alpha_; }
  double delta() const noexcept { return delta_; }
  double A() const noexcept { return A_; }
  /// sup |eps|; infinite for the log-tail law.
  double K() const noexcept { return K_; }
  /// eps is C^2 for |x| > L.
  double L() const noexcept { return L_; }
  double alpha_tilde() const noexcept { return alpha_tilde_; }
  double A_tilde() const noexcept { return A_tilde_; }
  /// False for the log-tail law, whose eps diverges.
  bool in_domain() const noexcept { return family_ != ModelFamily::kLogTail; }

  double eps(double x) const;
  double eps_derivative(double x) const;
  double eps_second_derivative(double x) const;
  /// Points where eps or its derivatives are not smooth.
  std::vector<double> breakpoints() const;

  /// P(X > x) for x >= 0.
  double upper_tail(double x) const;
  /// P(X < -x) for x >= 0.
  double lower_tail(double x) const;
  /// Lebesgue density, zero on the empty inner interval.
  double density(double x) const;

  double sample_one(std::mt19937_64& rng) const;
  std::vector<double> sample(std::size_t n, std::uint64_t seed, std::uint64_t stream = 0) const;

 private:
  AttractionModel() = default;
  double eps_knots(double x, int order) const;
  double conditional_tail(double x, bool right) const;

  ModelFamily family_ = ModelFamily::kPareto;
  double alpha_ = 1.0;
  double delta_ = 0.0;
  double A_ = 0.5;
  double K_ = 0.5;
  double L_ = 1.0;
  double alpha_tilde_ = 0.0;
  double A_tilde_ = 0.0;
  std::vector<EpsKnot> right_;
  std::vector<EpsKnot> left_;  // stored with |x|
  double p_right_ = 0.0;
  double p_left_ = 0.0;
};

/// (2 A alpha / d_alpha)^{1/alpha}.
double sigma_of(const AttractionModel& m);

/// Solution of gamma = (n log gamma)^{1/alpha} on the branch gamma > e^{1/alpha}.
double gamma_n(double alpha, double n);
/// |gamma - (n log gamma)^{1/alpha}| / max(1, gamma).
double gamma_n_residual(double alpha, double n, double gamma);

/// int_0^t P(X > r) dr - t P(X > t) - (int_0^t P(X < -r) dr - t P(X < -t)),
/// which equals E[X 1(0 < |X| < t)]. Tail integrals by quadrature.
double truncated_mean_from_tails(const std::function<double(double)>& upper,
                                 const std::function<double(double)>& lower, double t,
                                 const std::vector<double>& breaks = {},
                                 const QuadratureConfig& cfg = {});

/// E[X 1(0 < |X| < t)], closed form for the built-in families.
double truncated_mean(const AttractionModel& m, double t, const QuadratureConfig& cfg = {});

/// S_n = (X_1 + ... + X_n - centering) / scale.
struct SumNormalization {
  double scale = 1.0;
  double centering = 0.0;
};

/// scale = sigma n^{1/alpha}; centering = n E[X 1(0 < |X| < sigma n)] at
/// alpha = 1. The log-tail law uses scale = sigma gamma_n and no centering.
SumNormalization normalization(const AttractionModel& m, std::size_t n);

/// Raw sums X_1 + ... + X_n for replicates 0..r-1; replicate i draws from
/// stream i of `seed`, so results do not depend on `threads`.
std::vector<double> raw_sums(const AttractionModel& m, std::size_t n, std::size_t replicates,
                             std::uint64_t seed, unsigned threads = 0);

/// One S_n from replicate stream `replicate`.
double build_Sn(const AttractionModel& m, std::size_t n, std::uint64_t seed, std::uint64_t replicate = 0);

/// S_n for replicates 0..r-1, in replicate order.
std::vector<double> build_Sn_replicates(const AttractionModel& m, std::size_t n, std::size_t replicates,
                                        std::uint64_t seed, unsigned threads = 0);
SampleSet build_Sn_batch(const AttractionModel& m, std::size_t n, std::size_t replicates,
                         std::uint64_t seed, unsigned threads = 0);

/// sigma n / (X_1 + ... + X_n - n E[X 1(0 < |X| < sigma n)]); empty when the
/// denominator is zero. Requires alpha = 1, delta = 0.
std::optional<double> reciprocal_Tn(const AttractionModel& m, std::size_t n, std::uint64_t seed,
                                    std::uint64_t replicate = 0);

struct TnBatch {
  std::vector<double> values;
  std::size_t excluded = 0;
};
TnBatch reciprocal_Tn_batch(const AttractionModel& m, std::size_t n, std::size_t replicates,
                            std::uint64_t seed, unsigned threads = 0);

}  // namespace stablestein
