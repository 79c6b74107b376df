#include "stablestein/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stablestein/bounds.hpp"
#include "stablestein/frac_ops.hpp"
#include "stablestein/gclt.hpp"
#include "stablestein/metrics.hpp"
#include "stablestein/report.hpp"
#include "stablestein/stable_core.hpp"
#include "stablestein/stable_law.hpp"
#include "stablestein/stein_solver.hpp"
#include "stablestein/test_functions.hpp"

namespace stablestein::cli {

namespace {

struct Common {
  std::string out;
  std::string config;
  bool svg = false;
  bool selftest = false;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct Outcome {
  std::optional<CsvTable> table;
  std::string summary;
  std::vector<PlotSeries> plot;
  PlotOptions plot_opt;
};

using Checks = std::vector<std::pair<std::string, bool>>;

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string a, b, k;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, k))
    throw PreconditionError("grid must be lo:hi:count, got '" + spec + "'");
  const double lo = std::stod(a), hi = std::stod(b);
  const long cnt = std::stol(k);
  if (cnt < 1 || !(hi >= lo)) throw PreconditionError("grid needs count >= 1 and hi >= lo");
  for (long i = 0; i < cnt; ++i) out.push_back(cnt == 1 ? lo : lo + (hi - lo) * i / (cnt - 1.0));
  return out;
}

std::vector<double> points(const std::vector<double>& xs, const std::string& grid, std::vector<double> fallback) {
  if (!grid.empty()) return parse_grid(grid);
  if (!xs.empty()) return xs;
  return fallback;
}

void add_common(CLI::App* sc, Common& c) {
  sc->add_option("--out", c.out, "Output directory (default: $STABLESTEIN_OUTPUT_DIR or .)");
  sc->add_option("--config", c.config, "JSON file with the same keys as the long flags");
  sc->add_flag("--svg", c.svg, "Also write an SVG line plot");
  sc->add_flag("--selftest", c.selftest, "Run the invariant suite instead");
  sc->add_option("--seed", c.seed, "Random seed");
  sc->add_option("--threads", c.threads, "Worker threads for replicate loops (0 = all cores)");
}

std::string out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* e = std::getenv(kOutputDirEnv); e && *e) return e;
  return ".";
}

bool close_to(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---- model options shared by the sum and bound subcommands

struct ModelOpts {
  std::string model = "pareto";
  double alpha = 0.5;
  double delta = 0.0;
  double alpha_tilde = 0.8;
  double A = 0.25;
  double A_tilde = 0.25;
  std::string model_json;
};

void add_model(CLI::App* sc, ModelOpts& m) {
  sc->add_option("--model", m.model, "pareto | mixed | logtail");
  sc->add_option("--alpha", m.alpha, "Stability index in (0, 1]");
  sc->add_option("--delta", m.delta, "Skewness in (-1, 1)");
  sc->add_option("--alpha-tilde", m.alpha_tilde, "Second exponent of the mixed model");
  sc->add_option("--A", m.A, "Leading tail constant of the mixed model");
  sc->add_option("--A-tilde", m.A_tilde, "Second tail constant of the mixed model");
  sc->add_option("--model-json", m.model_json, "JSON model definition file");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

AttractionModel make_model(const ModelOpts& m) {
  if (!m.model_json.empty()) return AttractionModel::from_json(read_file(m.model_json));
  if (m.model == "pareto") return AttractionModel::pareto(m.alpha, m.delta);
  if (m.model == "mixed") return AttractionModel::mixed(m.alpha, m.alpha_tilde, m.A, m.A_tilde, m.delta);
  if (m.model == "logtail") return AttractionModel::logtail(m.alpha);
  throw PreconditionError("unknown model '" + m.model + "'");
}

Outcome curve_outcome(const BoundCurve& c, const std::string& title, RateModel rate) {
  Outcome o;
  o.table.emplace(std::vector<std::string>{"n", "term1", "term2", "term3", "term4", "total", "model"});
  PlotSeries s{"total", {}, {}};
  for (const auto& t : c.terms) {
    o.table->add_row({format_number(t.n), format_number(t.t1), format_number(t.t2), format_number(t.t3),
                      format_number(t.remainder), format_number(t.total), t.model_id});
    s.x.push_back(t.n);
    s.y.push_back(t.total);
  }
  o.summary = title + ": fitted " + rate_model_name(rate) + " slope " + format_number(c.fitted_slope) +
              " (residual " + format_number(c.fit_residual) + "); bound up to the unspecified constant";
  o.plot = {s};
  o.plot_opt = {title, "n", "bound", true, true};
  return o;
}

// ---- density

struct DensityOpts {
  double alpha = 1.0, delta = 0.0;
  std::vector<double> x;
  std::string grid;
};

Outcome run_density(const DensityOpts& o) {
  StableParams p(o.alpha, o.delta);
  const auto xs = points(o.x, o.grid, {0.0});
  Outcome r;
  r.table.emplace(std::vector<std::string>{"x", "pdf", "cdf"});
  PlotSeries s{"pdf", {}, {}};
  for (double x : xs) {
    const double d = pdf(p, 1.0, x), c = cdf(p, 1.0, x);
    r.table->add_numeric_row({x, d, c});
    s.x.push_back(x);
    s.y.push_back(d);
  }
  r.summary = "density alpha=" + format_number(o.alpha) + " delta=" + format_number(o.delta) + ": pdf(" +
              format_number(xs.front()) + ")=" + format_number(pdf(p, 1.0, xs.front()));
  r.plot = {s};
  r.plot_opt = {"stable density", "x", "p(x)"};
  return r;
}

Checks selftest_density() {
  Checks c;
  StableParams cau(1.0, 0.0);
  c.emplace_back("cauchy pdf(0) = 1/pi", close_to(pdf(cau, 1.0, 0.0), 1.0 / M_PI, 1e-12));
  c.emplace_back("cauchy cdf(2) = 1/2 + atan(2)/pi", close_to(cdf(cau, 1.0, 2.0), 0.5 + std::atan(2.0) / M_PI, 1e-12));
  StableParams p(0.5, 0.3);
  auto law = StableLaw::get(p);
  bool ok = true;
  for (double x : {-3.0, -0.2, 0.0, 0.7, 5.0}) ok = ok && close_to(law->pdf(x), pdf(p, 1.0, x), 1e-9);
  c.emplace_back("tabulated pdf matches inversion", ok);
  c.emplace_back("cdf(inf side) -> 1", close_to(cdf(p, 1.0, 1e12), 1.0, 1e-5));
  return c;
}

// ---- sample

struct SampleOpts {
  double alpha = 1.0, delta = 0.0;
  std::size_t n = 1000;
};

Outcome run_sample(const SampleOpts& o, const Common& c) {
  StableParams p(o.alpha, o.delta);
  auto v = sample(p, o.n, c.seed);
  Outcome r;
  r.table.emplace(std::vector<std::string>{"index", "value"});
  for (std::size_t i = 0; i < v.size(); ++i) r.table->add_row({std::to_string(i), format_number(v[i])});
  SampleSet s(v);
  r.summary = "sample: " + std::to_string(o.n) + " draws, median " +
              format_number(s.size() ? s.values()[s.size() / 2] : 0.0);
  return r;
}

Checks selftest_sample() {
  Checks c;
  StableParams p(0.7, 0.0);
  const auto a = sample(p, 2000, 5), b = sample(p, 2000, 5);
  c.emplace_back("deterministic per seed", a == b);
  SampleSet s(sample(p, 20000, 9));
  const double ks = d_kol_empirical(s, p);
  c.emplace_back("KS against own law below 1% critical value", std::sqrt(20000.0) * ks < 1.63);
  return c;
}

// ---- operator

struct OperatorOpts {
  double alpha = 0.5, delta = 0.0, lambda = 1.0;
  std::vector<double> x;
  std::string grid;
};

Outcome run_operator(const OperatorOpts& o) {
  StableParams p(o.alpha, o.delta);
  const double lam = o.lambda;
  Evaluand e{[lam](double x) { return std::cos(lam * x); }, [lam](double x) { return -lam * std::sin(lam * x); },
             FarField::kOscillatory, {}};
  const auto psi = char_exponent(p, lam);
  Outcome r;
  r.table.emplace(std::vector<std::string>{"x", "L_cos", "exact", "abs_error"});
  double worst = 0.0;
  for (double x : points(o.x, o.grid, parse_grid("-5:5:21"))) {
    const double v = apply_L(p, e, x);
    const double ex = std::real(psi * std::complex<double>(std::cos(lam * x), std::sin(lam * x)));
    worst = std::max(worst, std::abs(v - ex));
    r.table->add_numeric_row({x, v, ex, std::abs(v - ex)});
  }
  r.summary = "operator: max |L cos - Re(psi e^{i lambda x})| = " + format_number(worst);
  return r;
}

Checks selftest_operator() {
  Checks c;
  for (double a : {0.5, 1.0}) {
    StableParams p(a, 0.0);
    Evaluand e{[](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); }, FarField::kOscillatory, {}};
    bool ok = true;
    for (double x : {-1.0, 0.0, 2.5}) ok = ok && std::abs(apply_L(p, e, x) + std::cos(x)) <= 1e-4;
    c.emplace_back("multiplier identity alpha=" + format_number(a), ok);
  }
  return c;
}

// ---- stein-residual

struct SteinOpts {
  double alpha = 0.5, delta = 0.0, beta = 0.0;
  std::string h = "clamp-id";
  std::vector<double> x;
  std::string grid;
};

double beta_or_default(double beta, double alpha) { return beta > 0.0 ? beta : 0.5 * alpha; }

Outcome run_stein(const SteinOpts& o) {
  StableParams p(o.alpha, o.delta);
  SteinSolution sol(p, test_function_by_name(o.h, beta_or_default(o.beta, o.alpha)));
  Outcome r;
  r.table.emplace(std::vector<std::string>{"x", "f", "fprime", "residual"});
  double worst = 0.0;
  for (double x : points(o.x, o.grid, parse_grid("-2:2:5"))) {
    const double res = sol.residual(x);
    worst = std::max(worst, std::abs(res));
    r.table->add_numeric_row({x, sol.value(x), sol.derivative(x), res});
  }
  r.summary = "stein-residual h=" + o.h + ": max |A f - (h - E h(Z))| = " + format_number(worst) +
              ", E h(Z) = " + format_number(sol.eh_z());
  return r;
}

Checks selftest_stein() {
  Checks c;
  StableParams p(0.5, 0.0);
  SteinSolution sol(p, clamp_identity());
  c.emplace_back("residual at 0.5 below 5e-3", std::abs(sol.residual(0.5)) <= 5e-3);
  c.emplace_back("f odd for odd h", close_to(sol.value(0.7), -sol.value(-0.7), 1e-8));
  c.emplace_back("E h(Z) = 0 for odd h", close_to(sol.eh_z(), 0.0, 1e-12));
  return c;
}

// ---- regularity

struct RegularityOpts {
  double alpha = 0.5, delta = 0.0, beta = 0.0;
  std::string h = "clamp-id";
  std::size_t pairs = 1000;
  std::size_t operator_points = 8;
};

Outcome run_regularity(const RegularityOpts& o, const Common& c) {
  StableParams p(o.alpha, o.delta);
  const double beta = beta_or_default(o.beta, o.alpha);
  ProbeConfig pc;
  pc.pairs = o.pairs;
  pc.operator_points = o.operator_points;
  pc.seed = c.seed;
  auto rep = regularity_probe(p, test_function_by_name(o.h, beta), beta, pc);
  Outcome r;
  r.table.emplace(std::vector<std::string>{"estimate", "value", "samples", "cap", "exceeds_cap", "failure"});
  int over = 0;
  for (const auto& e : rep.estimates) {
    over += e.exceeds_cap;
    r.table->add_row({e.name, format_number(e.value), std::to_string(e.samples), format_number(e.cap),
                      e.exceeds_cap ? "1" : "0", e.failure});
  }
  r.summary = "regularity h=" + o.h + ": " + std::to_string(rep.estimates.size()) + " estimates, " +
              std::to_string(over) + " above their caps";
  return r;
}

Checks selftest_regularity() {
  Checks c;
  ProbeConfig pc;
  pc.pairs = 200;
  pc.operator_points = 3;
  auto rep = regularity_probe(StableParams(0.5, 0.0), half_tanh(), 0.25, pc);
  const auto* fp = rep.find("fprime_sup");
  c.emplace_back("||f'|| within alpha", fp && !fp->exceeds_cap);
  return c;
}

// ---- gclt-run

struct GcltOpts {
  ModelOpts model;
  std::vector<std::size_t> n{100, 1000};
  std::size_t replicates = 10000;
  double beta = 0.0;
  bool lower = false;
};

Outcome run_gclt(const GcltOpts& o, const Common& c) {
  const auto m = make_model(o.model);
  StableParams target(m.alpha(), m.delta());
  const double beta = beta_or_default(o.beta, m.alpha());
  const auto ref = stratified_reference(target, o.replicates);
  Outcome r;
  r.table.emplace(std::vector<std::string>{"n", "replicates", "d_kol", "kol_se", "dwb_upper", "kol_from_dwb",
                                           "dwb_lower", "dwb_lower_se", "model"});
  PlotSeries s{"d_kol", {}, {}};
  for (std::size_t n : o.n) {
    const auto sn = build_Sn_batch(m, n, o.replicates, c.seed, c.threads);
    const double dk = d_kol_empirical(sn, target);
    const double dwb = d_wbeta_upper(sn, ref, beta);
    double lo = std::nan(""), lo_se = std::nan("");
    if (o.lower) {
      const auto le = d_wbeta_lower(sn, target, beta);
      lo = le.value;
      lo_se = le.std_error;
    }
    r.table->add_row({std::to_string(n), std::to_string(o.replicates), format_number(dk),
                      format_number(kolmogorov_se(o.replicates)), format_number(dwb),
                      format_number(kol_from_wbeta(dwb, target)), format_number(lo), format_number(lo_se), m.id()});
    s.x.push_back(static_cast<double>(n));
    s.y.push_back(dk);
  }
  r.summary = "gclt-run " + m.id() + ": " + std::to_string(o.n.size()) + " sample sizes, " +
              std::to_string(o.replicates) + " replicates each";
  r.plot = {s};
  r.plot_opt = {"empirical Kolmogorov distance", "n", "d_kol", true, true};
  return r;
}

Checks selftest_gclt() {
  Checks c;
  c.emplace_back("gamma_n(1, 10) = 35.7715", close_to(gamma_n(1.0, 10.0), 35.7715206396, 1e-8));
  const auto par = AttractionModel::pareto(0.5, 0.0);
  c.emplace_back("pareto tail at 4", close_to(par.upper_tail(4.0), 0.25, 1e-15));
  c.emplace_back("symmetric truncated mean is 0", truncated_mean(par, 10.0) == 0.0);
  c.emplace_back("sigma for pareto alpha = 1", close_to(sigma_of(AttractionModel::pareto(1.0, 0.0)), M_PI / 2, 1e-14));
  const auto mix = AttractionModel::mixed(0.5, 1.5, 0.25, 0.25, 0.0);
  c.emplace_back("mixed eps(2) = 0.125", close_to(mix.eps(2.0), 0.125, 1e-15));
  const auto xs = AttractionModel::pareto(0.5, 0.0).sample(100000, 3);
  double above = 0;
  for (double x : xs) above += x > 4.0;
  c.emplace_back("pareto tail frequency at 4", std::abs(above / 1e5 - 0.25) <= 3 * std::sqrt(0.25 * 0.75 / 1e5));
  return c;
}

// ---- bound-curve

int decade_of(double n) {
  if (!(n >= 1.0)) throw PreconditionError("n bounds must be >= 1");
  return static_cast<int>(std::lround(std::log10(n)));
}

struct CurveOpts {
  ModelOpts model;
  double nmin = 1e2, nmax = 1e6;
  double beta = 0.0;
  std::string rate = "power";
  bool generic = false;
};

Outcome run_curve(const CurveOpts& o) {
  const auto m = make_model(o.model);
  const auto rate = rate_model_from_name(o.rate);
  BoundConfig bc;
  bc.beta = o.beta;
  bc.generic = o.generic;
  const auto ns = decades(decade_of(o.nmin), decade_of(o.nmax));
  if (!m.in_domain()) return curve_outcome(appendixB_curve(m.alpha(), ns, rate), "bound-curve " + m.id(), rate);
  return curve_outcome(bound_curve(m, ns, rate, bc), "bound-curve " + m.id(), rate);
}

Checks selftest_curve() {
  Checks c;
  for (const auto& m : {AttractionModel::pareto(0.5, 0.5), AttractionModel::mixed(0.5, 0.8, 0.25, 0.25, 0.2),
                        AttractionModel::mixed(1.0, 1.5, 0.25, 0.25, 0.0)}) {
    BoundConfig g;
    g.generic = true;
    const auto a = theorem_bound(m, 1e3), b = theorem_bound(m, 1e3, g);
    c.emplace_back("closed form = quadrature for " + m.id(), close_to(a.total, b.total, 1e-8 * a.total));
  }
  c.emplace_back("refuses log-tail law", [] {
    try {
      theorem_bound(AttractionModel::logtail(1.0), 100);
    } catch (const PreconditionError&) {
      return true;
    }
    return false;
  }());
  return c;
}

// ---- rate-fit

struct RateOpts {
  std::string input;
  std::string n_column = "n";
  std::string column = "total";
  std::vector<double> n, values;
  std::string rate = "power";
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool q = false;
  for (char ch : line) {
    if (ch == '"') q = !q;
    else if (ch == ',' && !q) { out.push_back(cur); cur.clear(); }
    else cur += ch;
  }
  out.push_back(cur);
  return out;
}

Outcome run_rate(const RateOpts& o) {
  std::vector<double> n = o.n, v = o.values;
  if (!o.input.empty()) {
    std::istringstream in(read_file(o.input));
    std::string line;
    if (!std::getline(in, line)) throw PreconditionError("empty CSV input");
    const auto head = split_csv_line(line);
    auto col = [&](const std::string& name) {
      for (std::size_t i = 0; i < head.size(); ++i)
        if (head[i] == name) return i;
      throw PreconditionError("CSV has no column '" + name + "'");
    };
    const std::size_t cn = col(o.n_column), cv = col(o.column);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      n.push_back(std::stod(cells.at(cn)));
      v.push_back(std::stod(cells.at(cv)));
    }
  }
  const auto rate = rate_model_from_name(o.rate);
  const auto fit = rate_fit(n, v, rate);
  Outcome r;
  r.table.emplace(std::vector<std::string>{"rate_model", "points", "slope", "intercept", "residual", "degenerate"});
  r.table->add_row({o.rate, std::to_string(n.size()), format_number(fit.slope), format_number(fit.intercept),
                    format_number(fit.residual), fit.degenerate ? "1" : "0"});
  r.summary = "rate-fit " + o.rate + ": slope " + format_number(fit.slope) + (fit.degenerate ? " (degenerate input)" : "");
  return r;
}

Checks selftest_rate() {
  Checks c;
  const auto ns = decades(2, 6);
  std::vector<double> a, b, d;
  for (double n : ns) {
    a.push_back(1.0 / n);
    b.push_back(std::log(n) * std::log(n) / n);
    d.push_back(1.0 / std::log(n));
  }
  c.emplace_back("power", close_to(rate_fit(ns, a, RateModel::kPower).slope, -1.0, 1e-12));
  c.emplace_back("power_times_logsq", close_to(rate_fit(ns, b, RateModel::kPowerTimesLogSq).slope, -1.0, 1e-12));
  c.emplace_back("inverse_log", close_to(rate_fit(ns, d, RateModel::kInverseLog).slope, -1.0, 1e-12));
  c.emplace_back("constant input flagged", rate_fit(ns, std::vector<double>(5, 2.0), RateModel::kPower).degenerate);
  return c;
}

// ---- examples

struct Example12Opts {
  double alpha = 0.5, delta = 0.0, alpha_tilde = 0.8, A = 0.25, A_tilde = 0.25, beta = 0.0;
  double nmin = 1e2, nmax = 1e6;
  std::size_t replicates = 0;
  double mc_nmax = 1e3;
};

Outcome run_example(const AttractionModel& m, const Example12Opts& o, const Common& c, const std::string& name) {
  const auto rate = m.alpha() == 1.0 && (m.family() == ModelFamily::kPareto || m.alpha_tilde() >= 2.0)
                        ? RateModel::kPowerTimesLogSq
                        : RateModel::kPower;
  BoundConfig bc;
  bc.beta = o.beta;
  const auto ns = decades(decade_of(o.nmin), decade_of(o.nmax));
  const auto curve = bound_curve(m, ns, rate, bc);
  auto out = curve_outcome(curve, name + " " + m.id(), rate);
  if (m.delta() != 0.0 && m.alpha() < 1.0 && ns.size() >= 4) {
    std::vector<double> rem;
    for (const auto& t : curve.terms) rem.push_back(t.remainder);
    out.summary += "; remainder slope " + format_number(rate_fit(ns, rem, RateModel::kPower).slope);
  }
  if (o.replicates > 0) {
    StableParams target(m.alpha(), m.delta());
    CsvTable mc({"n", "replicates", "d_kol", "kol_se"});
    for (double n : ns) {
      if (n > o.mc_nmax) break;
      const auto sn = build_Sn_batch(m, static_cast<std::size_t>(n), o.replicates, c.seed, c.threads);
      mc.add_numeric_row({n, static_cast<double>(o.replicates), d_kol_empirical(sn, target),
                          kolmogorov_se(o.replicates)});
    }
    std::filesystem::create_directories(out_dir(c));
    mc.write((std::filesystem::path(out_dir(c)) / (name + "_mc.csv")).string());
  }
  return out;
}

Checks selftest_example1() {
  Checks c;
  const auto ns = decades(2, 6);
  c.emplace_back("alpha=0.5 slope -1", close_to(bound_curve(AttractionModel::pareto(0.5, 0.0), ns, RateModel::kPower).fitted_slope, -1.0, 0.05));
  c.emplace_back("alpha=1 slope -1 after (log n)^2",
                 close_to(bound_curve(AttractionModel::pareto(1.0, 0.0), ns, RateModel::kPowerTimesLogSq).fitted_slope, -1.0, 0.05));
  return c;
}

Checks selftest_example2() {
  Checks c;
  const auto ns = decades(2, 6);
  c.emplace_back("alpha_tilde=0.8 slope -0.6",
                 close_to(bound_curve(AttractionModel::mixed(0.5, 0.8, 0.25, 0.25, 0.0), ns, RateModel::kPower).fitted_slope, -0.6, 0.05));
  const auto m = AttractionModel::mixed(0.5, 0.8, 0.25, 0.25, 0.0);
  c.emplace_back("continuity of tails at 1", close_to(m.upper_tail(1.0), m.upper_tail(std::nextafter(1.0, 0.0)), 1e-15));
  return c;
}

struct Example3Opts {
  std::string model = "pareto";
  double alpha_tilde = 1.5;
  std::vector<std::size_t> n{100, 1000, 10000};
  std::size_t replicates = 10000;
};

AttractionModel example3_model(const Example3Opts& o) {
  if (o.model == "pareto") return AttractionModel::pareto(1.0, 0.0);
  if (o.model == "mixed") return AttractionModel::mixed(1.0, o.alpha_tilde, 0.25, 0.25, 0.0);
  throw PreconditionError("example3 model must be pareto or mixed");
}

Outcome run_example3(const Example3Opts& o, const Common& c) {
  const auto m = example3_model(o);
  StableParams cau(1.0, 0.0);
  Outcome r;
  r.table.emplace(std::vector<std::string>{"n", "replicates", "excluded", "ks_T", "ks_S", "abs_diff", "kol_se"});
  double worst = 0.0;
  for (std::size_t n : o.n) {
    const auto t = reciprocal_Tn_batch(m, n, o.replicates, c.seed, c.threads);
    const auto s = build_Sn_batch(m, n, o.replicates, c.seed, c.threads);
    const double kt = d_kol_empirical(SampleSet(t.values), cau), ks = d_kol_empirical(s, cau);
    worst = std::max(worst, std::abs(kt - ks));
    r.table->add_numeric_row({static_cast<double>(n), static_cast<double>(o.replicates),
                              static_cast<double>(t.excluded), kt, ks, std::abs(kt - ks),
                              kolmogorov_se(o.replicates)});
  }
  r.summary = "example3 " + m.id() + ": max |KS(T_n) - KS(S_n)| = " + format_number(worst);
  return r;
}

Checks selftest_example3() {
  Checks c;
  const auto m = AttractionModel::pareto(1.0, 0.0);
  const auto t = reciprocal_Tn_batch(m, 50, 2000, 4, 1);
  const auto s = build_Sn_batch(m, 50, 2000, 4, 1);
  StableParams cau(1.0, 0.0);
  c.emplace_back("KS(T_n) = KS(S_n)",
                 close_to(d_kol_empirical(SampleSet(t.values), cau), d_kol_empirical(s, cau), 1e-12));
  c.emplace_back("T_n = 1/S_n", close_to(*reciprocal_Tn(m, 50, 4, 7) * build_Sn(m, 50, 4, 7), 1.0, 1e-12));
  return c;
}

struct AppendixOpts {
  double alpha = 1.0;
  double nmin = 1e2, nmax = 1e6;
};

Outcome run_appendix(const AppendixOpts& o) {
  const auto ns = decades(decade_of(o.nmin), decade_of(o.nmax));
  const auto c = appendixB_curve(o.alpha, ns, RateModel::kInverseLog);
  Outcome r;
  r.table.emplace(std::vector<std::string>{"n", "gamma_n", "term1", "term2", "term3", "total"});
  PlotSeries s{"total", {}, {}};
  for (const auto& t : c.terms) {
    r.table->add_numeric_row({t.n, gamma_n(o.alpha, t.n), t.t1, t.t2, t.t3, t.total});
    s.x.push_back(t.n);
    s.y.push_back(t.total);
  }
  r.summary = "appendixB alpha=" + format_number(o.alpha) + ": inverse_log slope " + format_number(c.fitted_slope);
  if (ns.size() >= 4) {
    std::vector<double> lead;
    for (const auto& t : c.terms) lead.push_back(t.t1);
    r.summary += " (leading term alone " + format_number(rate_fit(ns, lead, RateModel::kInverseLog).slope) + ")";
  }
  r.plot = {s};
  r.plot_opt = {"log-tail rate", "n", "bound", true, true};
  return r;
}

Checks selftest_appendix() {
  Checks c;
  for (double a : {0.3, 0.5, 0.8, 1.0})
    for (double n : {3.0, 10.0, 1e6}) {
      const double g = gamma_n(a, n);
      c.emplace_back("gamma_n residual alpha=" + format_number(a) + " n=" + format_number(n),
                     gamma_n_residual(a, n, g) <= 1e-9);
    }
  c.emplace_back("alpha=1 n=10 leading term", close_to(bound_appendixB(1.0, 10.0).t1, 1.0 / std::log(35.7715206396), 1e-9));
  return c;
}

// ---- config merging

std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") path = args[i + 1];
  for (const auto& a : args)
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  if (path.empty()) return args;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw PreconditionError("config must be a JSON object");
  std::set<std::string> present;
  for (const auto& a : args)
    if (a.rfind("--", 0) == 0) present.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  auto scalar = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_number(v.get<double>());
    throw PreconditionError("config values must be strings, numbers, booleans or arrays");
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (present.count(it.key()) || it.key() == "config") continue;
    const auto& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back("--" + it.key());
      continue;
    }
    args.push_back("--" + it.key());
    if (v.is_array())
      for (const auto& e : v) args.push_back(scalar(e));
    else
      args.push_back(scalar(v));
  }
  return args;
}

int report_checks(const std::string& name, const Checks& checks, std::ostream& out) {
  int pass = 0;
  for (const auto& [label, ok] : checks) {
    out << (ok ? "  pass  " : "  FAIL  ") << label << '\n';
    pass += ok;
  }
  out << "selftest " << name << ": " << pass << "/" << checks.size() << " passed\n";
  return pass == static_cast<int>(checks.size()) ? kOk : kSelftestFailed;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stein's method for stable laws: experiment runner"};
  app.require_subcommand(1);
  // -h is taken by the test function option, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  Common common;

  DensityOpts dens;
  auto* sd = app.add_subcommand("density", "Density and CDF of S_alpha(delta)");
  sd->add_option("--alpha", dens.alpha);
  sd->add_option("--delta", dens.delta);
  sd->add_option("--x", dens.x, "Evaluation points");
  sd->add_option("--grid", dens.grid, "lo:hi:count");

  SampleOpts samp;
  auto* ss = app.add_subcommand("sample", "Exact draws of S_alpha(delta)");
  ss->add_option("--alpha", samp.alpha);
  ss->add_option("--delta", samp.delta);
  ss->add_option("--n", samp.n);

  OperatorOpts op;
  auto* so = app.add_subcommand("operator", "Generator applied to cos(lambda x)");
  so->add_option("--alpha", op.alpha);
  so->add_option("--delta", op.delta);
  so->add_option("--lambda", op.lambda);
  so->add_option("--x", op.x);
  so->add_option("--grid", op.grid);

  SteinOpts st;
  auto* sr = app.add_subcommand("stein-residual", "Solve the Stein equation and report residuals");
  sr->add_option("--alpha", st.alpha);
  sr->add_option("--delta", st.delta);
  sr->add_option("--beta", st.beta, "beta for d_beta based test functions (default alpha/2)");
  sr->add_option("--h", st.h, "Test function name");
  sr->add_option("--x", st.x);
  sr->add_option("--grid", st.grid);

  RegularityOpts reg;
  auto* sg = app.add_subcommand("regularity", "Probe the regularity of the Stein solution");
  sg->add_option("--alpha", reg.alpha);
  sg->add_option("--delta", reg.delta);
  sg->add_option("--beta", reg.beta);
  sg->add_option("--h", reg.h);
  sg->add_option("--pairs", reg.pairs);
  sg->add_option("--operator-points", reg.operator_points);

  GcltOpts gc;
  auto* sgc = app.add_subcommand("gclt-run", "Monte Carlo distances of normalized sums");
  add_model(sgc, gc.model);
  sgc->add_option("--n", gc.n, "Sample sizes");
  sgc->add_option("--replicates", gc.replicates);
  sgc->add_option("--beta", gc.beta);
  sgc->add_flag("--lower", gc.lower, "Also compute the dictionary lower estimate");

  CurveOpts cv;
  auto* sb = app.add_subcommand("bound-curve", "Deterministic upper bound over decades of n");
  add_model(sb, cv.model);
  sb->add_option("--nmin", cv.nmin, "Smallest n, rounded to a power of ten");
  sb->add_option("--nmax", cv.nmax, "Largest n, rounded to a power of ten");
  sb->add_option("--beta", cv.beta);
  sb->add_option("--rate", cv.rate, "power | power_times_logsq | inverse_log");
  sb->add_flag("--generic", cv.generic, "Use quadrature instead of closed forms");

  RateOpts rt;
  auto* sf = app.add_subcommand("rate-fit", "Fit a rate to (n, value) pairs");
  sf->add_option("--input", rt.input, "CSV file");
  sf->add_option("--n-column", rt.n_column);
  sf->add_option("--column", rt.column);
  sf->add_option("--n", rt.n);
  sf->add_option("--values", rt.values);
  sf->add_option("--rate", rt.rate);

  Example12Opts e1;
  auto* s1 = app.add_subcommand("example1", "Pareto tails");
  s1->add_option("--alpha", e1.alpha);
  s1->add_option("--delta", e1.delta);
  s1->add_option("--beta", e1.beta);
  s1->add_option("--nmin", e1.nmin);
  s1->add_option("--nmax", e1.nmax);
  s1->add_option("--replicates", e1.replicates, "Monte Carlo replicates (0 = bounds only)");
  s1->add_option("--mc-nmax", e1.mc_nmax);

  Example12Opts e2;
  auto* s2 = app.add_subcommand("example2", "Mixed decay tails");
  s2->add_option("--alpha", e2.alpha);
  s2->add_option("--alpha-tilde", e2.alpha_tilde);
  s2->add_option("--A", e2.A);
  s2->add_option("--A-tilde", e2.A_tilde);
  s2->add_option("--delta", e2.delta);
  s2->add_option("--beta", e2.beta);
  s2->add_option("--nmin", e2.nmin);
  s2->add_option("--nmax", e2.nmax);
  s2->add_option("--replicates", e2.replicates);
  s2->add_option("--mc-nmax", e2.mc_nmax);

  Example3Opts e3;
  auto* s3 = app.add_subcommand("example3", "Reciprocal of centred sums against Cauchy");
  s3->add_option("--model", e3.model, "pareto | mixed");
  s3->add_option("--alpha-tilde", e3.alpha_tilde);
  s3->add_option("--n", e3.n);
  s3->add_option("--replicates", e3.replicates);

  AppendixOpts ab;
  auto* sa = app.add_subcommand("appendixB", "Log-tail law and the gamma_n normalization");
  sa->add_option("--alpha", ab.alpha);
  sa->add_option("--nmin", ab.nmin);
  sa->add_option("--nmax", ab.nmax);

  for (auto* sc : {sd, ss, so, sr, sg, sgc, sb, sf, s1, s2, s3, sa}) add_common(sc, common);

  std::vector<std::string> args;
  try {
    args = merge_config(raw_args);
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  std::vector<const char*> argv{"stablestein-cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (common.selftest) {
      static const std::map<std::string, std::function<Checks()>> suites{
          {"density", selftest_density},       {"sample", selftest_sample},
          {"operator", selftest_operator},     {"stein-residual", selftest_stein},
          {"regularity", selftest_regularity}, {"gclt-run", selftest_gclt},
          {"bound-curve", selftest_curve},     {"rate-fit", selftest_rate},
          {"example1", selftest_example1},     {"example2", selftest_example2},
          {"example3", selftest_example3},     {"appendixB", selftest_appendix}};
      return report_checks(name, suites.at(name)(), out);
    }
    Outcome o;
    if (name == "density") o = run_density(dens);
    else if (name == "sample") o = run_sample(samp, common);
    else if (name == "operator") o = run_operator(op);
    else if (name == "stein-residual") o = run_stein(st);
    else if (name == "regularity") o = run_regularity(reg, common);
    else if (name == "gclt-run") o = run_gclt(gc, common);
    else if (name == "bound-curve") o = run_curve(cv);
    else if (name == "rate-fit") o = run_rate(rt);
    else if (name == "example1") o = run_example(AttractionModel::pareto(e1.alpha, e1.delta), e1, common, name);
    else if (name == "example2")
      o = run_example(AttractionModel::mixed(e2.alpha, e2.alpha_tilde, e2.A, e2.A_tilde, e2.delta), e2, common, name);
    else if (name == "example3") o = run_example3(e3, common);
    else if (name == "appendixB") o = run_appendix(ab);

    const std::filesystem::path dir = out_dir(common);
    std::filesystem::create_directories(dir);
    if (o.table) o.table->write((dir / (name + ".csv")).string());
    if (common.svg && !o.plot.empty()) write_text((dir / (name + ".svg")).string(), svg_line_plot(o.plot, o.plot_opt));
    out << o.summary << '\n';
    return kOk;
  } catch (const PreconditionError& e) {
    err << "precondition failed in " << name << ": " << e.what() << '\n';
    return kPrecondition;
  } catch (const std::invalid_argument& e) {
    err << "invalid input in " << name << ": " << e.what() << '\n';
    return kPrecondition;
  } catch (const NumericalFailure& e) {
    err << "numerical failure in " << name << " at stage " << e.stage() << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error in " << name << ": " << e.what() << '\n';
    return kIo;
  } catch (const std::runtime_error& e) {
    err << "i/o error in " << name << ": " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "internal error in " << name << ": " << e.what() << '\n';
    return kInternal;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace stablestein::cli
