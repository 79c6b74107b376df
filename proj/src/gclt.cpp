#include "stablestein/gclt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/lambert_w.hpp>
#include <json.hpp>

#include "stablestein/stable_core.hpp"

namespace stablestein {

namespace {

double open_unit(std::mt19937_64& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double sgn(double x) { return (x > 0) - (x < 0); }

void check_alpha_delta(double alpha, double delta) {
  StableParams(alpha, delta);  // validates
}

// A h(a, t) with h(a, t) = 1 + int_1^t r^-a dr - t^{1-a}.
double power_piece(double a, double t) {
  const double lt = std::log(t);
  if (a == 1.0) return lt;
  return a * std::expm1((1.0 - a) * lt) / (1.0 - a);
}

}  // namespace

AttractionModel AttractionModel::pareto(double alpha, double delta) {
  check_alpha_delta(alpha, delta);
  AttractionModel m;
  m.family_ = ModelFamily::kPareto;
  m.alpha_ = alpha;
  m.delta_ = delta;
  m.A_ = 0.5;
  m.K_ = 0.5;
  m.L_ = 1.0;
  return m;
}

AttractionModel AttractionModel::mixed(double alpha, double alpha_tilde, double A, double A_tilde,
                                       double delta) {
  check_alpha_delta(alpha, delta);
  if (!(alpha_tilde > alpha)) throw PreconditionError("mixed model needs alpha_tilde > alpha");
  if (!(A > 0.0 && A_tilde > 0.0)) throw PreconditionError("mixed model needs A, A_tilde > 0");
  if (std::abs(A + A_tilde - 0.5) > 1e-12) throw PreconditionError("mixed model needs A + A_tilde = 1/2");
  AttractionModel m;
  m.family_ = ModelFamily::kMixed;
  m.alpha_ = alpha;
  m.delta_ = delta;
  m.A_ = A;
  m.A_tilde_ = A_tilde;
  m.alpha_tilde_ = alpha_tilde;
  m.K_ = std::max(A, A_tilde);
  m.L_ = 1.0;
  return m;
}

AttractionModel AttractionModel::logtail(double alpha) {
  check_alpha_delta(alpha, 0.0);
  AttractionModel m;
  m.family_ = ModelFamily::kLogTail;
  m.alpha_ = alpha;
  m.delta_ = 0.0;
  // With A = c / alpha the normalization (2 A alpha / d)^{1/alpha} reduces to
  // (alpha^2 e^alpha / ((1 + alpha) d))^{1/alpha}.
  const double c = alpha * alpha * std::exp(alpha) / (2.0 * (1.0 + alpha));
  m.A_ = c / alpha;
  m.K_ = std::numeric_limits<double>::infinity();
  m.L_ = std::numbers::e;
  return m;
}

AttractionModel AttractionModel::from_knots(double alpha, double delta, double A, std::vector<EpsKnot> knots) {
  check_alpha_delta(alpha, delta);
  if (!(A > 0.0 && A <= 0.5)) throw PreconditionError("knot model needs 0 < A <= 1/2");
  AttractionModel m;
  m.family_ = ModelFamily::kKnots;
  m.alpha_ = alpha;
  m.delta_ = delta;
  m.A_ = A;
  for (const auto& k : knots) {
    if (!(std::abs(k.x) >= 1.0) || !std::isfinite(k.eps) || !std::isfinite(k.deps))
      throw PreconditionError("knots need |x| >= 1 and finite values");
    if (k.x > 0) m.right_.push_back(k);
    else m.left_.push_back({-k.x, k.eps, -k.deps});
  }
  if (m.right_.empty() && m.left_.empty()) throw PreconditionError("knot model needs knots");
  if (m.right_.empty()) m.right_ = m.left_;
  if (m.left_.empty()) m.left_ = m.right_;
  for (auto* side : {&m.right_, &m.left_}) {
    std::sort(side->begin(), side->end(), [](auto& a, auto& b) { return a.x < b.x; });
    for (std::size_t i = 1; i < side->size(); ++i)
      if ((*side)[i].x == (*side)[i - 1].x) throw PreconditionError("duplicate knot");
    if (side->front().x != 1.0 || std::abs(side->front().eps - (0.5 - A)) > 1e-9)
      throw PreconditionError("knot model needs eps(+-1) = 1/2 - A");
  }
  auto exponent = [](const std::vector<EpsKnot>& s) {
    const auto& k = s.back();
    if (k.eps == 0.0) {
      if (k.deps != 0.0) throw PreconditionError("outermost knot with eps = 0 needs eps' = 0");
      return 0.0;
    }
    return k.x * k.deps / k.eps;
  };
  m.p_right_ = exponent(m.right_);
  m.p_left_ = exponent(m.left_);
  m.L_ = std::max(m.right_.back().x, m.left_.back().x);
  // Validity: both tails nonincreasing; record sup |eps|.
  double K = std::max(A, std::abs(0.5 - A));
  for (bool right : {true, false}) {
    double prev = right ? (1.0 + delta) / 2.0 : (1.0 - delta) / 2.0;
    for (double y = 0.0; y <= std::log(1e8); y += 1e-3) {
      const double x = std::exp(y);
      K = std::max(K, std::abs(m.eps(right ? x : -x)));
      const double t = right ? m.upper_tail(x) : m.lower_tail(x);
      if (t < 0.0 || t > prev * (1.0 + 1e-12)) throw PreconditionError("knot model tails are not monotone");
      prev = t;
    }
  }
  m.K_ = K;
  return m;
}

AttractionModel AttractionModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("model JSON: ") + e.what());
  }
  try {
    const std::string fam = j.at("family").get<std::string>();
    const double alpha = j.at("alpha").get<double>();
    const double delta = j.value("delta", 0.0);
    if (fam == "pareto") return pareto(alpha, delta);
    if (fam == "mixed")
      return mixed(alpha, j.at("alpha_tilde").get<double>(), j.at("A").get<double>(),
                   j.at("A_tilde").get<double>(), delta);
    if (fam == "logtail") return logtail(alpha);
    if (fam == "knots") {
      std::vector<EpsKnot> knots;
      for (const auto& k : j.at("knots")) knots.push_back({k.at(0).get<double>(), k.at(1).get<double>(), k.at(2).get<double>()});
      return from_knots(alpha, delta, j.at("A").get<double>(), std::move(knots));
    }
    throw PreconditionError("unknown model family '" + fam + "'");
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("model JSON: ") + e.what());
  }
}

std::string AttractionModel::id() const {
  std::ostringstream os;
  switch (family_) {
    case ModelFamily::kPareto: os << "pareto(a=" << alpha_ << ",d=" << delta_ << ")"; break;
    case ModelFamily::kMixed:
      os << "mixed(a=" << alpha_ << ",at=" << alpha_tilde_ << ",A=" << A_ << ",d=" << delta_ << ")";
      break;
    case ModelFamily::kLogTail: os << "logtail(a=" << alpha_ << ")"; break;
    case ModelFamily::kKnots: os << "knots(a=" << alpha_ << ",d=" << delta_ << ",A=" << A_ << ")"; break;
  }
  return os.str();
}

double AttractionModel::eps_knots(double x, int order) const {
  const auto& side = x > 0 ? right_ : left_;
  const double p = x > 0 ? p_right_ : p_left_;
  const double s = sgn(x);
  const double ax = std::abs(x);
  const auto& last = side.back();
  double v, d1, d2;
  if (ax >= last.x) {
    const double r = ax / last.x;
    v = last.eps * std::pow(r, p);
    d1 = p * v / ax;
    d2 = p * (p - 1.0) * v / (ax * ax);
  } else {
    auto it = std::upper_bound(side.begin(), side.end(), ax, [](double a, const EpsKnot& k) { return a < k.x; });
    const auto& k1 = *it;
    const auto& k0 = *(it - 1);
    const double h = k1.x - k0.x;
    const double t = (ax - k0.x) / h;
    const double t2 = t * t, t3 = t2 * t;
    v = (2 * t3 - 3 * t2 + 1) * k0.eps + (t3 - 2 * t2 + t) * h * k0.deps + (-2 * t3 + 3 * t2) * k1.eps +
        (t3 - t2) * h * k1.deps;
    d1 = ((6 * t2 - 6 * t) * k0.eps + (3 * t2 - 4 * t + 1) * h * k0.deps + (-6 * t2 + 6 * t) * k1.eps +
          (3 * t2 - 2 * t) * h * k1.deps) / h;
    d2 = ((12 * t - 6) * k0.eps + (6 * t - 4) * h * k0.deps + (-12 * t + 6) * k1.eps + (6 * t - 2) * h * k1.deps) /
         (h * h);
  }
  // Stored in |x|; odd order derivatives flip sign on the left.
  if (order == 0) return v;
  if (order == 1) return s * d1;
  return d2;
}

double AttractionModel::eps(double x) const {
  const double ax = std::abs(x);
  const double a = alpha_;
  const double x0 = family_ == ModelFamily::kLogTail ? std::numbers::e : 1.0;
  if (ax < x0) return 0.5 * std::pow(ax, a) - A_;
  switch (family_) {
    case ModelFamily::kPareto: return 0.0;
    case ModelFamily::kMixed: return A_tilde_ * std::pow(ax, a - alpha_tilde_);
    case ModelFamily::kLogTail: {
      const double c = A_ * a;
      return c * (a * std::log(ax) + 1.0) / (a * a) - A_;
    }
    case ModelFamily::kKnots: return eps_knots(x, 0);
  }
  return 0.0;
}

double AttractionModel::eps_derivative(double x) const {
  const double ax = std::abs(x);
  const double a = alpha_;
  const double s = sgn(x);
  const double x0 = family_ == ModelFamily::kLogTail ? std::numbers::e : 1.0;
  if (ax < x0) return x == 0.0 ? 0.0 : s * 0.5 * a * std::pow(ax, a - 1.0);
  switch (family_) {
    case ModelFamily::kPareto: return 0.0;
    case ModelFamily::kMixed: return s * A_tilde_ * (a - alpha_tilde_) * std::pow(ax, a - alpha_tilde_ - 1.0);
    case ModelFamily::kLogTail: return s * A_ / ax;
    case ModelFamily::kKnots: return eps_knots(x, 1);
  }
  return 0.0;
}

double AttractionModel::eps_second_derivative(double x) const {
  const double ax = std::abs(x);
  const double a = alpha_;
  const double x0 = family_ == ModelFamily::kLogTail ? std::numbers::e : 1.0;
  if (ax < x0) return x == 0.0 ? 0.0 : 0.5 * a * (a - 1.0) * std::pow(ax, a - 2.0);
  switch (family_) {
    case ModelFamily::kPareto: return 0.0;
    case ModelFamily::kMixed: {
      const double e = a - alpha_tilde_;
      return A_tilde_ * e * (e - 1.0) * std::pow(ax, e - 2.0);
    }
    case ModelFamily::kLogTail: return -A_ / (ax * ax);
    case ModelFamily::kKnots: return eps_knots(x, 2);
  }
  return 0.0;
}

std::vector<double> AttractionModel::breakpoints() const {
  const double x0 = family_ == ModelFamily::kLogTail ? std::numbers::e : 1.0;
  std::vector<double> b{-x0, 0.0, x0};
  if (family_ == ModelFamily::kKnots) {
    for (const auto& k : right_) b.push_back(k.x);
    for (const auto& k : left_) b.push_back(-k.x);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  return b;
}

double AttractionModel::upper_tail(double x) const {
  if (x < 0.0) throw PreconditionError("upper_tail needs x >= 0");
  const double x0 = family_ == ModelFamily::kLogTail ? std::numbers::e : 1.0;
  if (x < x0) return 0.5 * (1.0 + delta_);
  return (A_ + eps(x)) * (1.0 + delta_) * std::pow(x, -alpha_);
}

double AttractionModel::lower_tail(double x) const {
  if (x < 0.0) throw PreconditionError("lower_tail needs x >= 0");
  const double x0 = family_ == ModelFamily::kLogTail ? std::numbers::e : 1.0;
  if (x < x0) return 0.5 * (1.0 - delta_);
  return (A_ + eps(-x)) * (1.0 - delta_) * std::pow(x, -alpha_);
}

double AttractionModel::density(double x) const {
  const double ax = std::abs(x);
  const double x0 = family_ == ModelFamily::kLogTail ? std::numbers::e : 1.0;
  if (ax < x0) return 0.0;
  const double k = x > 0 ? 1.0 + delta_ : 1.0 - delta_;
  // -d/d|x| of (A + eps) k |x|^-alpha.
  const double de = sgn(x) * eps_derivative(x);
  return k * std::pow(ax, -alpha_) * (alpha_ * (A_ + eps(x)) / ax - de);
}

double AttractionModel::conditional_tail(double x, bool right) const {
  return 2.0 * (A_ + eps(right ? x : -x)) * std::pow(x, -alpha_);
}

double AttractionModel::sample_one(std::mt19937_64& rng) const {
  const double u = open_unit(rng);
  const double pr = 0.5 * (1.0 + delta_);
  const bool right = u < pr;
  // Conditional tail level in (0, 1].
  const double v = right ? u / pr : (1.0 - u) / (1.0 - pr);
  const double a = alpha_;
  double x = 1.0;
  switch (family_) {
    case ModelFamily::kPareto:
      if (a == 1.0) x = 1.0 / v;
      else if (a == 0.5) x = 1.0 / (v * v);
      else x = std::pow(v, -1.0 / a);
      break;
    case ModelFamily::kMixed: {
      // Newton in y = log x on the convex decreasing 2(A e^{-ay} + At e^{-bt y}) - v,
      // started left of the root.
      const double b = alpha_tilde_;
      double y = std::max(0.0, std::log(2.0 * A_ / v) / a);
      for (int it = 0; it < 100; ++it) {
        const double ea = A_ * std::exp(-a * y), eb = A_tilde_ * std::exp(-b * y);
        const double g = 2.0 * (ea + eb) - v;
        const double dg = -2.0 * (a * ea + b * eb);
        const double step = g / dg;
        y -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, y)) break;
      }
      x = std::exp(y);
      break;
    }
    case ModelFamily::kLogTail: {
      // u e^-u = v (1 + a) e^{-(1 + a)} with u = a log x + 1 >= 1 + a.
      const double arg = -v * (1.0 + a) * std::exp(-(1.0 + a));
      const double w = arg <= -std::exp(-1.0) ? -1.0 : boost::math::lambert_wm1(arg);
      x = std::exp((-w - 1.0) / a);
      break;
    }
    case ModelFamily::kKnots: {
      double lo = 0.0, hi = 1.0;
      while (conditional_tail(std::exp(hi), right) > v) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (conditional_tail(std::exp(mid), right) > v ? lo : hi) = mid;
      }
      x = std::exp(0.5 * (lo + hi));
      break;
    }
  }
  return right ? x : -x;
}

std::vector<double> AttractionModel::sample(std::size_t n, std::uint64_t seed, std::uint64_t stream) const {
  auto rng = make_rng(seed, stream);
  std::vector<double> out(n);
  for (auto& v : out) v = sample_one(rng);
  return out;
}

double sigma_of(const AttractionModel& m) {
  return std::pow(2.0 * m.A() * m.alpha() / d_alpha(m.alpha()), 1.0 / m.alpha());
}

double gamma_n(double alpha, double n) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw PreconditionError("gamma_n needs alpha in (0, 1]");
  if (!(n >= 3.0)) throw PreconditionError("gamma_n needs n >= 3");
  // F(y) = alpha y - log n - log y with y = log gamma: convex and increasing
  // for y > 1/alpha, so Newton started right of the root decreases to it.
  const double ln = std::log(n);
  auto F = [&](double y) { return alpha * y - ln - std::log(y); };
  double y = (ln + 1.0) / alpha;
  while (F(y) <= 0.0) y *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double step = F(y) / (alpha - 1.0 / y);
    y -= step;
    if (std::abs(step) <= 4e-16 * y) {
      const double g = std::exp(y);
      if (gamma_n_residual(alpha, n, g) > 1e-9) break;
      return g;
    }
  }
  throw NumericalFailure("gamma_n", std::exp(y), std::abs(F(y)));
}

double gamma_n_residual(double alpha, double n, double gamma) {
  return std::abs(gamma - std::pow(n * std::log(gamma), 1.0 / alpha)) / std::max(1.0, gamma);
}

double truncated_mean_from_tails(const std::function<double(double)>& upper,
                                 const std::function<double(double)>& lower, double t,
                                 const std::vector<double>& breaks, const QuadratureConfig& cfg) {
  if (!(t > 0.0)) throw PreconditionError("truncated mean needs t > 0");
  std::vector<double> pts{0.0, t};
  for (double b : breaks)
    if (b > 0.0 && b < t) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const double iu = integrate_checked(upper, pts, cfg, "truncated_mean");
  const double il = integrate_checked(lower, pts, cfg, "truncated_mean");
  return (iu - t * upper(t)) - (il - t * lower(t));
}

double truncated_mean(const AttractionModel& m, double t, const QuadratureConfig& cfg) {
  if (!(t > 0.0)) throw PreconditionError("truncated mean needs t > 0");
  switch (m.family()) {
    case ModelFamily::kLogTail: return 0.0;
    case ModelFamily::kPareto:
    case ModelFamily::kMixed: {
      if (t <= 1.0 || m.delta() == 0.0) return 0.0;
      double b = m.A() * power_piece(m.alpha(), t);
      if (m.family() == ModelFamily::kMixed) b += m.A_tilde() * power_piece(m.alpha_tilde(), t);
      return 2.0 * m.delta() * b;
    }
    case ModelFamily::kKnots: {
      std::vector<double> br;
      for (double b : m.breakpoints())
        if (b > 0) br.push_back(b);
      return truncated_mean_from_tails([&](double r) { return m.upper_tail(r); },
                                       [&](double r) { return m.lower_tail(r); }, t, br, cfg);
    }
  }
  return 0.0;
}

SumNormalization normalization(const AttractionModel& m, std::size_t n) {
  if (n == 0) throw PreconditionError("sums need n >= 1");
  const double nn = static_cast<double>(n);
  const double sigma = sigma_of(m);
  SumNormalization out;
  if (!m.in_domain()) {
    out.scale = sigma * gamma_n(m.alpha(), std::max(nn, 3.0));
    return out;
  }
  out.scale = sigma * std::pow(nn, 1.0 / m.alpha());
  if (m.alpha() == 1.0) out.centering = nn * truncated_mean(m, sigma * nn);
  return out;
}

std::vector<double> raw_sums(const AttractionModel& m, std::size_t n, std::size_t replicates,
                             std::uint64_t seed, unsigned threads) {
  if (n == 0) throw PreconditionError("sums need n >= 1");
  std::vector<double> out(replicates);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      auto rng = make_rng(seed, r);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += m.sample_one(rng);
      out[r] = s;
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, replicates)));
  if (threads <= 1) {
    work(0, replicates);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (replicates + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(replicates, lo + chunk);
    if (lo < hi) pool.emplace_back(work, lo, hi);
  }
  for (auto& th : pool) th.join();
  return out;
}

double build_Sn(const AttractionModel& m, std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
  const auto norm = normalization(m, n);
  auto rng = make_rng(seed, replicate);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += m.sample_one(rng);
  return (s - norm.centering) / norm.scale;
}

std::vector<double> build_Sn_replicates(const AttractionModel& m, std::size_t n, std::size_t replicates,
                                        std::uint64_t seed, unsigned threads) {
  const auto norm = normalization(m, n);
  auto s = raw_sums(m, n, replicates, seed, threads);
  for (auto& v : s) v = (v - norm.centering) / norm.scale;
  return s;
}

SampleSet build_Sn_batch(const AttractionModel& m, std::size_t n, std::size_t replicates, std::uint64_t seed,
                         unsigned threads) {
  return SampleSet(build_Sn_replicates(m, n, replicates, seed, threads), m.id() + ",n=" + std::to_string(n));
}

namespace {
void check_tn_model(const AttractionModel& m) {
  if (m.alpha() != 1.0 || m.delta() != 0.0 || !m.in_domain())
    throw PreconditionError("reciprocal statistic needs an alpha = 1, delta = 0 model in the domain of attraction");
}
}  // namespace

std::optional<double> reciprocal_Tn(const AttractionModel& m, std::size_t n, std::uint64_t seed,
                                    std::uint64_t replicate) {
  check_tn_model(m);
  const auto norm = normalization(m, n);
  auto rng = make_rng(seed, replicate);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += m.sample_one(rng);
  const double den = s - norm.centering;
  if (den == 0.0) return std::nullopt;
  return norm.scale / den;
}

TnBatch reciprocal_Tn_batch(const AttractionModel& m, std::size_t n, std::size_t replicates, std::uint64_t seed,
                            unsigned threads) {
  check_tn_model(m);
  const auto norm = normalization(m, n);
  TnBatch out;
  for (double s : raw_sums(m, n, replicates, seed, threads)) {
    const double den = s - norm.centering;
    if (den == 0.0) ++out.excluded;
    else out.values.push_back(norm.scale / den);
  }
  return out;
}

}  // namespace stablestein
