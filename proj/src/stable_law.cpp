#include "stablestein/stable_law.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace stablestein {

namespace {

constexpr double kXiTable = 36.0;
constexpr double kStep = 0.0125;
constexpr double kXiCap = 200.0;
constexpr int kRuleOrder = 12;

// Sixth-order Lagrange interpolation of v[first..last] sampled at
// x0 + j h, evaluated at x. The stencil is clamped to the valid range.
double lagrange6(const double* v, std::size_t n, double x0, double h, double x) {
  const double s = (x - x0) / h;
  long i0 = static_cast<long>(std::floor(s)) - 2;
  i0 = std::clamp(i0, 0L, static_cast<long>(n) - 6);
  const double u = s - static_cast<double>(i0);
  double acc = 0.0;
  for (int j = 0; j < 6; ++j) {
    double w = 1.0;
    for (int k = 0; k < 6; ++k)
      if (k != j) w *= (u - k) / static_cast<double>(j - k);
    acc += w * v[i0 + j];
  }
  return acc;
}

// log cosh and log sinh of |xi| without overflow.
double log_cosh(double xi) {
  const double a = std::abs(xi);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}
double log_sinh_abs(double xi) {
  const double a = std::abs(xi);
  if (a < 1.0) return std::log(std::sinh(a));
  return a + std::log1p(-std::exp(-2.0 * a)) - std::numbers::ln2;
}

QuadratureConfig table_cfg() {
  QuadratureConfig q;
  q.rel_tol = 1e-12;
  q.abs_tol = 1e-300;
  return q;
}

// Grid scale near the mode. For alpha < 1 the density is smooth but not
// analytic at 0 and its Taylor coefficients grow like Gamma((k+1)/alpha), so
// the map y = s sinh(xi) must zoom in as alpha decreases.
double core_scale(double alpha) {
  const double s = 10.0 * std::pow(1e-12 / std::tgamma(7.0 / alpha), 1.0 / 6.0);
  return std::clamp(s, 1e-10, 1.0);
}

}  // namespace

std::shared_ptr<const StableLaw> StableLaw::get(const StableParams& p) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, std::shared_ptr<const StableLaw>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(p.alpha(), p.delta());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto law = std::make_shared<const StableLaw>(p);
  cache.emplace(key, law);
  return law;
}

StableLaw::StableLaw(const StableParams& p)
    : params_(p), scale_(core_scale(p.alpha())), xi_max_(kXiTable - std::log(core_scale(p.alpha()))), h_(kStep) {
  const QuadratureConfig q = table_cfg();
  const auto m = static_cast<std::size_t>(std::llround(xi_max_ / h_));
  xi_max_ = static_cast<double>(m) * h_;
  const std::size_t n = 2 * m + 1;
  logp_.assign(n, 0.0);
  const bool symmetric = p.delta() == 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (symmetric && i < m) continue;
    const double xi = (static_cast<double>(i) - static_cast<double>(m)) * h_;
    logp_[i] = std::log(stablestein::pdf(p, 1.0, to_y(xi), q));
  }
  if (symmetric)
    for (std::size_t i = 0; i < m; ++i) logp_[i] = logp_[n - 1 - i];

  const double a = p.alpha();
  const double d = d_alpha(a);
  c_hi_ = 0.5 * d * (1.0 + p.delta());
  c_lo_ = 0.5 * d * (1.0 - p.delta());
  const double y_end = to_y(xi_max_);
  auto kappa = [&](double logp_end, double c) {
    const double ratio = std::exp(logp_end - std::log(c) + (1.0 + a) * std::log(y_end));
    return (ratio - 1.0) * std::pow(y_end, a);
  };
  kappa_hi_ = kappa(logp_.back(), c_hi_);
  kappa_lo_ = kappa(logp_.front(), c_lo_);

  // Density maximum: best node, then golden-section search on the interpolant.
  std::size_t best = static_cast<std::size_t>(std::max_element(logp_.begin(), logp_.end()) - logp_.begin());
  double lo = (static_cast<double>(best) - static_cast<double>(m) - 1.0) * h_;
  double hi = lo + 2.0 * h_;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (log_pdf_xi(x1) > log_pdf_xi(x2)) hi = x2; else lo = x1;
  }
  sup_pdf_ = std::exp(log_pdf_xi(0.5 * (lo + hi)));

  const double k = a < 1.0 ? p.delta() * std::tan(std::numbers::pi * a / 2.0) : 0.0;
  f0_ = 0.5 - std::atan(k) / (std::numbers::pi * a);

  // Product rule panels in xi.
  const double shift = std::ceil(-std::log(scale_));
  std::vector<double> edges{0.0};
  for (double e = 0.5; e <= 8.0 + shift + 1e-12; e += 0.5) edges.push_back(e);
  for (double e = 9.0 + shift; e <= 24.0 + shift + 1e-12; e += 1.0) edges.push_back(e);
  for (double e = 27.0 + shift; e <= kXiCap + shift + 1e-12; e += 3.0) edges.push_back(e);
  xi_cap_ = edges.back();
  std::vector<double> all;
  for (auto it = edges.rbegin(); it != edges.rend(); ++it)
    if (*it > 0.0) all.push_back(-*it);
  all.insert(all.end(), edges.begin(), edges.end());
  const GaussRule& gl = gauss_legendre(kRuleOrder);
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    Panel pn{all[i], all[i + 1], node_y_.size()};
    const double c = 0.5 * (pn.lo + pn.hi), hw = 0.5 * (pn.hi - pn.lo);
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      const double xi = c + hw * gl.x[j];
      node_y_.push_back(to_y(xi));
      node_w_.push_back(gl.w[j] * hw * pdf_xi_weight(xi));
    }
    panels_.push_back(pn);
  }
}

double StableLaw::log_pdf_xi(double xi) const {
  if (std::abs(xi) <= xi_max_)
    return lagrange6(logp_.data(), logp_.size(), -xi_max_, h_, xi);
  const double a = params_.alpha();
  const double ly = std::log(scale_) + log_sinh_abs(xi);
  const double c = xi > 0 ? c_hi_ : c_lo_;
  const double kappa = xi > 0 ? kappa_hi_ : kappa_lo_;
  return std::log(c) - (1.0 + a) * ly + std::log1p(kappa * std::exp(-a * ly));
}

double StableLaw::pdf_xi_weight(double xi) const {
  return std::exp(log_pdf_xi(xi) + log_cosh(xi) + std::log(scale_));
}

double StableLaw::pdf(double y) const {
  if (std::isnan(y)) return y;
  if (std::isinf(y)) return 0.0;
  return std::exp(log_pdf_xi(to_xi(y)));
}

void StableLaw::build_cdf() const {
  std::call_once(cdf_once_, [this] {
    const QuadratureConfig q = table_cfg();
    const auto m = static_cast<std::size_t>(std::llround(xi_max_ / h_));
    log_up_.assign(m + 1, 0.0);
    log_lo_.assign(m + 1, 0.0);
    log_up_[0] = std::log1p(-f0_);
    log_lo_[0] = std::log(f0_);
    const StableParams mirror(params_.alpha(), -params_.delta());
    for (std::size_t j = 1; j <= m; ++j) {
      const double y = to_y(static_cast<double>(j) * h_);
      log_up_[j] = std::log(tail_probability(params_, 1.0, y, q));
      log_lo_[j] = params_.delta() == 0.0 ? log_up_[j] : std::log(tail_probability(params_, 1.0, -y, q));
    }
    const double a = params_.alpha(), y_end = to_y(xi_max_);
    auto kappa = [&](double lt, double c) {
      const double ratio = std::exp(lt - std::log(c / a) + a * std::log(y_end));
      return (ratio - 1.0) * std::pow(y_end, a);
    };
    tail_kappa_hi_ = kappa(log_up_.back(), c_hi_);
    tail_kappa_lo_ = kappa(log_lo_.back(), c_lo_);
  });
}

double StableLaw::cdf(double y) const {
  if (std::isnan(y)) return y;
  if (y == 0.0) return f0_;
  build_cdf();
  const double xi = to_xi(std::abs(y));
  double lt;
  if (xi <= xi_max_) {
    const auto& v = y > 0 ? log_up_ : log_lo_;
    lt = lagrange6(v.data(), v.size(), 0.0, h_, xi);
  } else {
    const double a = params_.alpha();
    const double c = y > 0 ? c_hi_ : c_lo_;
    const double kappa = y > 0 ? tail_kappa_hi_ : tail_kappa_lo_;
    const double ly = std::log(scale_) + log_sinh_abs(xi);
    lt = std::log(c / a) - a * ly + std::log1p(kappa * std::exp(-a * ly));
  }
  const double tail = std::exp(lt);
  return y > 0 ? 1.0 - tail : tail;
}

double StableLaw::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw PreconditionError("quantile needs u in (0, 1)");
  if (u == f0_) return 0.0;
  build_cdf();
  const bool upper = u > f0_;
  const double target = upper ? std::log1p(-u) : std::log(u);
  const auto& v = upper ? log_up_ : log_lo_;
  double y;
  if (target < v.back()) {
    // Beyond the grid: invert the two-term tail expansion by fixed point.
    const double a = params_.alpha();
    const double c = (upper ? c_hi_ : c_lo_) / a;
    const double kappa = upper ? tail_kappa_hi_ : tail_kappa_lo_;
    y = std::exp((std::log(c) - target) / a);
    for (int it = 0; it < 20; ++it)
      y = std::exp((std::log(c) + std::log1p(kappa * std::pow(y, -a)) - target) / a);
  } else {
    double lo = 0.0, hi = xi_max_;
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (lagrange6(v.data(), v.size(), 0.0, h_, mid) > target) lo = mid; else hi = mid;
    }
    y = to_y(0.5 * (lo + hi));
  }
  return upper ? y : -y;
}

std::pair<std::size_t, std::size_t> StableLaw::panel_range(double growth) const {
  const double gap = params_.alpha() - growth;
  if (!(gap > 0.0)) throw PreconditionError("expectation needs growth exponent below alpha");
  const double cut = std::min(xi_cap_, 30.0 / gap - std::log(scale_));
  std::size_t first = 0, last = panels_.size();
  while (first < last && panels_[first].hi <= -cut) ++first;
  while (last > first && panels_[last - 1].lo >= cut) --last;
  return {first, last};
}

std::size_t StableLaw::rule_size(double growth) const {
  auto [first, last] = panel_range(growth);
  return (last - first) * static_cast<std::size_t>(kRuleOrder);
}

double StableLaw::expect(const std::function<double(double)>& g, double a, double b,
                         std::span<const double> features, double growth) const {
  if (!(a >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw PreconditionError("expect needs a finite scale a >= 0 and shift b");
  if (a == 0.0) return g(b);
  auto [first, last] = panel_range(growth);
  std::vector<double> kinks;
  kinks.reserve(features.size());
  for (double z : features) {
    const double xi = to_xi((z - b) / a);
    if (std::isfinite(xi) && xi > panels_[first].lo && xi < panels_[last - 1].hi) kinks.push_back(xi);
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

  const GaussRule& gl = gauss_legendre(kRuleOrder);
  const std::size_t order = gl.x.size();
  double total = 0.0;
  std::size_t k = 0;
  std::vector<double> cuts;
  for (std::size_t i = first; i < last; ++i) {
    const Panel& pn = panels_[i];
    while (k < kinks.size() && kinks[k] <= pn.lo) ++k;
    cuts.clear();
    while (k < kinks.size() && kinks[k] < pn.hi) cuts.push_back(kinks[k++]);
    if (cuts.empty()) {
      double s = 0.0;
      for (std::size_t j = 0; j < order; ++j)
        s += node_w_[pn.first + j] * g(a * node_y_[pn.first + j] + b);
      total += s;
      continue;
    }
    double lo = pn.lo;
    cuts.push_back(pn.hi);
    for (double hi : cuts) {
      const double c = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
      double s = 0.0;
      for (std::size_t j = 0; j < order; ++j) {
        const double xi = c + hw * gl.x[j];
        s += gl.w[j] * pdf_xi_weight(xi) * g(a * to_y(xi) + b);
      }
      total += s * hw;
      lo = hi;
    }
  }
  return total;
}

}  // namespace stablestein
