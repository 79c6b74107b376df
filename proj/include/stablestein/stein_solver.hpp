#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stablestein/frac_ops.hpp"
#include "stablestein/stable_law.hpp"
#include "stablestein/test_functions.hpp"

namespace stablestein {

/// E h(Z), Z ~ S_alpha(delta), by the tabulated product rule.
double expected_h(const StableParams& p, const TestFunction& h, const QuadratureConfig& cfg = {});

/// One exact draw of the OU process started at x: x e^{-t/alpha} + (1 - e^{-t})^{1/alpha} Z.
double ou_sample(const StableParams& p, double x, double t, std::uint64_t seed);
double ou_sample(const StableParams& p, double x, double t, std::mt19937_64& rng);

/// Q_t h(x) = E h((1 - e^{-t})^{1/alpha} Z + e^{-t/alpha} x).
double qt_apply(const StableParams& p, const TestFunction& h, double t, double x,
                const QuadratureConfig& cfg = {});

/// Solution of A f = h - E h(Z) given by f(x) = -int_0^inf (Q_t h(x) - E h(Z)) dt.
/// Immutable after construction; evaluations are pure.
class SteinSolution {
 public:
  SteinSolution(const StableParams& p, TestFunction h, const QuadratureConfig& cfg = {});

  const StableParams& params() const noexcept { return params_; }
  const TestFunction& h() const noexcept { return h_; }
  const QuadratureConfig& cfg() const noexcept { return cfg_; }
  double eh_z() const noexcept { return eh_; }

  double q_t(double t, double x) const;
  /// d/dx Q_t h(x) = e^{-t/alpha} E h'(...).
  double q_t_derivative(double t, double x) const;

  double value(double x) const;
  /// f'(x) = -int_0^inf e^{-t/alpha} E h'(...) dt when h' is regular,
  /// otherwise a central difference of value() with step 1e-4.
  double derivative(double x) const;
  double central_difference(double x, double step = 1e-4) const;

  Evaluand evaluand() const;
  /// A f(x) - (h(x) - E h(Z)).
  double residual(double x) const;

 private:
  double time_integral(const std::function<double(double)>& g, double x, bool centered) const;

  StableParams params_;
  TestFunction h_;
  QuadratureConfig cfg_;
  std::shared_ptr<const StableLaw> law_;
  double eh_;
};

double solve_f(const StableParams& p, const TestFunction& h, double x, const QuadratureConfig& cfg = {});
double solve_f_prime(const StableParams& p, const TestFunction& h, double x,
                     const QuadratureConfig& cfg = {});
double residual(const StableParams& p, const TestFunction& h, double x, const QuadratureConfig& cfg = {});

struct ProbeEstimate {
  std::string name;
  double value = 0.0;
  std::size_t samples = 0;
  /// Explicit bound where one is known; NaN otherwise.
  double cap = std::numeric_limits<double>::quiet_NaN();
  bool exceeds_cap = false;
  /// Non-empty when the estimate could not be computed.
  std::string failure;
};

struct RegularityReport {
  std::vector<ProbeEstimate> estimates;
  const ProbeEstimate* find(const std::string& name) const;
};

struct ProbeConfig {
  std::size_t pairs = 1000;
  /// Points for the sup and modulus of L f (each costs one Lévy integral).
  std::size_t operator_points = 8;
  double radius = 5.0;
  double hoelder_gamma = 0.5;
  std::uint64_t seed = 11;
  double cap_slack = 1e-3;
};

/// Randomized-pair estimates of the norms controlled by the regularity
/// theory: ||f'||_inf, the Hölder-alpha (alpha < 1) or log-Lipschitz
/// (alpha = 1) seminorm of f', the d_beta modulus of f, and the sup and
/// modulus of L f.
RegularityReport regularity_probe(const StableParams& p, const TestFunction& h, double beta,
                                  const ProbeConfig& probe = {}, const QuadratureConfig& cfg = {});

}  // namespace stablestein
