#include "stablestein/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "stablestein/stable_law.hpp"

namespace stablestein {

SampleSet::SampleSet(std::vector<double> values, std::string tag)
    : values_(std::move(values)), tag_(std::move(tag)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw PreconditionError("SampleSet entries must be finite");
  std::sort(values_.begin(), values_.end());
}

QuadratureConfig kolmogorov_cfg() {
  QuadratureConfig q;
  q.rel_tol = 1e-13;
  q.abs_tol = 1e-15;
  return q;
}

double d_kol_empirical(const SampleSet& s, const StableParams& p, const QuadratureConfig& cfg) {
  const auto& v = s.values();
  if (v.empty()) throw PreconditionError("d_kol_empirical needs at least one point");
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double f = cdf(p, 1.0, v[i], cfg);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(j) / n - f});
    i = j;
  }
  return std::clamp(d, 0.0, 1.0);
}

double kolmogorov_se(std::size_t n) {
  // sd of the Kolmogorov distribution, sqrt(pi^2/12 - pi ln^2 2 / 2).
  const double sd = std::sqrt(M_PI * M_PI / 12.0 - M_PI * std::log(2.0) * std::log(2.0) / 2.0);
  return sd / std::sqrt(static_cast<double>(n));
}

SampleSet stratified_reference(const StableParams& p, std::size_t n) {
  if (n == 0) throw PreconditionError("reference sample needs n >= 1");
  auto law = StableLaw::get(p);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i)
    q[i] = law->quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return SampleSet(std::move(q), "stratified-quantiles");
}

double d_wbeta_upper(const SampleSet& sf, const SampleSet& sz, double beta) {
  if (sf.size() != sz.size()) throw PreconditionError("d_wbeta_upper needs equal sample sizes");
  if (!(beta > 0.0)) throw PreconditionError("d_wbeta_upper needs beta > 0");
  if (sf.size() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < sf.size(); ++i) acc += d_beta(sf.values()[i], sz.values()[i], beta);
  return acc / static_cast<double>(sf.size());
}

std::vector<TestFunction> hbeta_dictionary(const StableParams& p, double beta, std::size_t family_size) {
  if (family_size == 0) throw PreconditionError("family_size must be at least 1");
  auto law = StableLaw::get(p);
  const std::size_t centers = (family_size + 7) / 8;
  std::vector<TestFunction> out;
  for (std::size_t k = 0; k < centers && out.size() < family_size; ++k) {
    const double c = law->quantile((static_cast<double>(k) + 0.5) / static_cast<double>(centers));
    for (int s = 0; s < 4 && out.size() < family_size; ++s) {
      const double psi = std::ldexp(1.0, s);
      out.push_back(ramp_step(c, psi));
      out.back().name = "ramp(c=" + std::to_string(c) + ",psi=" + std::to_string(psi) + ")";
      if (out.size() >= family_size) break;
      const double r = std::ldexp(1.0, s - 2);
      out.push_back(clamped_distance(c, r, beta));
      out.back().name = "clamped(c=" + std::to_string(c) + ",r=" + std::to_string(r) + ")";
    }
  }
  return out;
}

namespace {

LowerEstimate dictionary_max(const SampleSet& sf, const StableParams& p,
                             const std::vector<TestFunction>& dict, const std::vector<double>& weights) {
  auto law = StableLaw::get(p);
  LowerEstimate est;
  const double n = static_cast<double>(sf.size());
  if (sf.size() == 0) return est;
  for (std::size_t k = 0; k < dict.size(); ++k) {
    const auto& h = dict[k];
    double mean = 0.0, m2 = 0.0, count = 0.0;
    for (double x : sf.values()) {
      const double v = h.value(x);
      count += 1.0;
      const double d = v - mean;
      mean += d / count;
      m2 += d * (v - mean);
    }
    const double se = weights[k] * std::sqrt(m2 / std::max(1.0, n - 1.0) / n);
    const double eh = law->expect(h.value, 1.0, 0.0, h.breakpoints, h.growth);
    const double gap = weights[k] * std::abs(mean - eh);
    est.noise_envelope = std::max(est.noise_envelope, se);
    if (gap > est.value || k == 0) {
      est.value = gap;
      est.std_error = se;
      est.argmax = k;
      est.argmax_name = h.name;
    }
  }
  return est;
}

}  // namespace

LowerEstimate d_wbeta_lower(const SampleSet& sf, const StableParams& p, double beta,
                            std::size_t family_size, const QuadratureConfig& cfg) {
  cfg.validate();
  auto dict = hbeta_dictionary(p, beta, family_size);
  return dictionary_max(sf, p, dict, std::vector<double>(dict.size(), 1.0));
}

LowerEstimate d_fm_lower(const SampleSet& sf, const StableParams& p, double beta,
                         std::size_t family_size, const QuadratureConfig& cfg) {
  cfg.validate();
  auto dict = hbeta_dictionary(p, beta, family_size);
  std::vector<double> w(dict.size());
  // Every dictionary member is 1-Lipschitz, so the weight only has to absorb the sup norm.
  for (std::size_t k = 0; k < dict.size(); ++k) w[k] = 1.0 / (1.0 + dict[k].sup_norm);
  return dictionary_max(sf, p, dict, w);
}

double kol_from_wbeta(double dwb, const StableParams& p) {
  if (!(dwb >= 0.0)) throw PreconditionError("kol_from_wbeta needs dwb >= 0");
  return (1.0 + StableLaw::get(p)->sup_density()) * std::sqrt(dwb);
}

}  // namespace stablestein
