#include "stablestein/stein_solver.hpp"

#include <algorithm>
#include <cmath>

namespace stablestein {

namespace {

// Tolerances for the Lévy integral of a numerically evaluated f: its values
// carry quadrature noise near abs_tol, so the outer integral cannot ask for
// the same accuracy.
QuadratureConfig operator_cfg(const QuadratureConfig& cfg) {
  QuadratureConfig op = cfg;
  op.abs_tol = std::max(cfg.abs_tol * 1e3, 1e-7);
  op.rel_tol = std::max(cfg.rel_tol * 1e2, 1e-6);
  op.max_subdivisions = std::min(cfg.max_subdivisions, 600);
  return op;
}

QuadratureConfig time_cfg(const QuadratureConfig& cfg) {
  QuadratureConfig q = cfg;
  q.max_subdivisions = std::min(cfg.max_subdivisions, 2000);
  return q;
}

double ou_scale(double t, double alpha) { return std::pow(-std::expm1(-t), 1.0 / alpha); }

}  // namespace

double expected_h(const StableParams& p, const TestFunction& h, const QuadratureConfig& cfg) {
  cfg.validate();
  const double v = StableLaw::get(p)->expect(h.value, 1.0, 0.0, h.breakpoints, h.growth);
  if (!std::isfinite(v)) throw NumericalFailure("expected_h", v, std::numeric_limits<double>::infinity());
  return v;
}

double ou_sample(const StableParams& p, double x, double t, std::mt19937_64& rng) {
  if (!(t > 0.0)) throw PreconditionError("ou_sample needs t > 0");
  return x * std::exp(-t / p.alpha()) + ou_scale(t, p.alpha()) * sample_one(p, rng);
}

double ou_sample(const StableParams& p, double x, double t, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return ou_sample(p, x, t, rng);
}

double qt_apply(const StableParams& p, const TestFunction& h, double t, double x,
                const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0)) throw PreconditionError("qt_apply needs t > 0");
  return StableLaw::get(p)->expect(h.value, ou_scale(t, p.alpha()), x * std::exp(-t / p.alpha()),
                                   h.breakpoints, h.growth);
}

SteinSolution::SteinSolution(const StableParams& p, TestFunction h, const QuadratureConfig& cfg)
    : params_(p), h_(std::move(h)), cfg_(cfg), law_(StableLaw::get(p)) {
  cfg_.validate();
  if (!h_.value) throw PreconditionError("test function has no value");
  if (!(h_.growth < p.alpha())) throw PreconditionError("test function must grow slower than |x|^alpha");
  eh_ = law_->expect(h_.value, 1.0, 0.0, h_.breakpoints, h_.growth);
  if (!std::isfinite(eh_)) throw NumericalFailure("E h(Z)", eh_, std::numeric_limits<double>::infinity());
}

double SteinSolution::q_t(double t, double x) const {
  return law_->expect(h_.value, ou_scale(t, params_.alpha()), x * std::exp(-t / params_.alpha()),
                      h_.breakpoints, h_.growth);
}

double SteinSolution::q_t_derivative(double t, double x) const {
  if (!h_.derivative) throw PreconditionError("test function has no derivative");
  const double decay = std::exp(-t / params_.alpha());
  return decay * law_->expect(h_.derivative, ou_scale(t, params_.alpha()), x * decay, h_.breakpoints,
                              std::max(0.0, h_.growth - 1.0));
}

// int_0^inf g(t) dt. [0, T] is split where e^{-t/alpha} x crosses the
// features of h; the tail uses s = e^{-t} = e^{-T} sigma^4, which keeps the
// s^{gamma - 1} endpoint behaviour of slowly decaying integrands bounded.
double SteinSolution::time_integral(const std::function<double(double)>& g, double x, bool centered) const {
  const double a = params_.alpha();
  std::vector<double> pts{0.0, 0.05, 0.25, 1.0, 2.5};
  const double ax = std::abs(x);
  auto add_crossing = [&](double z) {
    const double az = std::abs(z);
    if (az > 0.0 && ax > az) {
      const double tz = a * std::log(ax / az);
      for (double dt : {-1.0, 0.0, 1.0})
        if (tz + dt > 0.0) pts.push_back(tz + dt);
    }
  };
  add_crossing(1.0);
  for (double z : h_.breakpoints) add_crossing(z);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const double t_end = pts.back() + 8.0;
  pts.push_back(t_end);

  const QuadratureConfig q = time_cfg(cfg_);
  const char* stage = centered ? "Stein solution time integral" : "Stein derivative time integral";
  const double head = integrate_checked(g, pts, q, stage);
  auto tail = [&](double sigma) {
    if (sigma <= 0.0) return 0.0;
    return g(t_end - 4.0 * std::log(sigma)) * 4.0 / sigma;
  };
  const double rest = integrate_checked(tail, 0.0, 1.0, q, stage);
  return head + rest;
}

double SteinSolution::value(double x) const {
  auto g = [&](double t) { return q_t(t, x) - eh_; };
  return -time_integral(g, x, true);
}

double SteinSolution::derivative(double x) const {
  if (!h_.derivative || !h_.derivative_regular) return central_difference(x);
  auto g = [&](double t) { return q_t_derivative(t, x); };
  return -time_integral(g, x, false);
}

double SteinSolution::central_difference(double x, double step) const {
  return (value(x + step) - value(x - step)) / (2.0 * step);
}

Evaluand SteinSolution::evaluand() const {
  auto self = std::make_shared<const SteinSolution>(*this);
  Evaluand e;
  e.value = [self](double y) { return self->value(y); };
  e.derivative = [self](double y) { return self->derivative(y); };
  e.far_field = FarField::kSmooth;
  e.features = h_.breakpoints;
  return e;
}

double SteinSolution::residual(double x) const {
  const double af = apply_A(params_, evaluand(), x, operator_cfg(cfg_));
  return af - (h_.value(x) - eh_);
}

double solve_f(const StableParams& p, const TestFunction& h, double x, const QuadratureConfig& cfg) {
  return SteinSolution(p, h, cfg).value(x);
}

double solve_f_prime(const StableParams& p, const TestFunction& h, double x, const QuadratureConfig& cfg) {
  return SteinSolution(p, h, cfg).derivative(x);
}

double residual(const StableParams& p, const TestFunction& h, double x, const QuadratureConfig& cfg) {
  return SteinSolution(p, h, cfg).residual(x);
}

const ProbeEstimate* RegularityReport::find(const std::string& name) const {
  for (const auto& e : estimates)
    if (e.name == name) return &e;
  return nullptr;
}

RegularityReport regularity_probe(const StableParams& p, const TestFunction& h, double beta,
                                  const ProbeConfig& probe, const QuadratureConfig& cfg) {
  RegularityReport report;
  const double a = p.alpha();
  auto rng = make_rng(probe.seed);
  std::uniform_real_distribution<double> pos(-probe.radius, probe.radius);
  std::uniform_real_distribution<double> small(-3.0, 0.0), wide(-3.0, 2.0);
  std::bernoulli_distribution sign;

  ProbeEstimate sup, mod, fmod, lsup, lmod;
  sup.name = "fprime_sup";
  mod.name = a < 1.0 ? "fprime_hoelder" : "fprime_loglip";
  fmod.name = "f_dbeta_modulus";
  lsup.name = "Lf_sup";
  lmod.name = a < 1.0 ? "Lf_hoelder" : "Lf_loglip";
  sup.cap = a;  // ||f'|| <= alpha, and <= 1 at alpha = 1
  fmod.cap = a / beta;

  std::optional<SteinSolution> sol;
  try {
    sol.emplace(p, h, cfg);
  } catch (const std::exception& e) {
    for (auto* est : {&sup, &mod, &fmod, &lsup, &lmod}) {
      est->failure = e.what();
      report.estimates.push_back(*est);
    }
    return report;
  }

  for (std::size_t i = 0; i < probe.pairs; ++i) {
    const double x = pos(rng);
    const double w = std::pow(10.0, small(rng)) * (sign(rng) ? 1.0 : -1.0);
    const double w2 = std::pow(10.0, wide(rng)) * (sign(rng) ? 1.0 : -1.0);
    try {
      const double d1 = sol->derivative(x), d2 = sol->derivative(x + w);
      sup.value = std::max({sup.value, std::abs(d1), std::abs(d2)});
      const double aw = std::abs(w);
      const double denom = a < 1.0 ? std::pow(aw, a) : (2.0 - std::log(aw)) * aw;
      mod.value = std::max(mod.value, std::abs(d1 - d2) / denom);
      sup.samples += 2;
      ++mod.samples;
    } catch (const std::exception& e) {
      sup.failure = mod.failure = e.what();
    }
    try {
      const double f1 = sol->value(x), f2 = sol->value(x + w2);
      fmod.value = std::max(fmod.value, std::abs(f1 - f2) / d_beta(0.0, w2, beta));
      ++fmod.samples;
    } catch (const std::exception& e) {
      fmod.failure = e.what();
    }
  }

  // L f at base points and close partners for the modulus.
  const Evaluand ev = sol->evaluand();
  const QuadratureConfig op = operator_cfg(cfg);
  const double gamma = probe.hoelder_gamma;
  // Separate stream so the operator points do not depend on the pair count.
  rng = make_rng(probe.seed, 1);
  std::uniform_real_distribution<double> close(-2.0, std::log10(0.5));
  for (std::size_t i = 0; i < (probe.operator_points + 1) / 2; ++i) {
    const double x = pos(rng);
    const double w = std::pow(10.0, close(rng));
    try {
      const double l1 = apply_L(p, ev, x, op), l2 = apply_L(p, ev, x + w, op);
      lsup.value = std::max({lsup.value, std::abs(l1), std::abs(l2)});
      lsup.samples += 2;
      const double denom = a < 1.0 ? std::pow(w, gamma) : w * (1.0 - std::log(w));
      lmod.value = std::max(lmod.value, std::abs(l1 - l2) / denom);
      ++lmod.samples;
    } catch (const std::exception& e) {
      lsup.failure = lmod.failure = e.what();
    }
  }

  for (auto* est : {&sup, &fmod})
    est->exceeds_cap = std::isfinite(est->cap) && est->value > est->cap + probe.cap_slack;
  for (auto* est : {&sup, &mod, &fmod, &lsup, &lmod}) report.estimates.push_back(*est);
  return report;
}

}  // namespace stablestein
