#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stablestein/cli.hpp"
#include "stablestein/report.hpp"

namespace fs = std::filesystem;
using namespace stablestein;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("stablestein_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("number formatting and csv") {
  CHECK(format_number(1.0 / 3) == "0.333333333333");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-1.0 / 0.0) == "-inf");
  CsvTable t({"a", "b"});
  t.add_row({"x,y", "q\""});
  t.add_numeric_row({1.5, 2.0});
  CHECK(t.str() == "a,b\n\"x,y\",\"q\"\"\"\n1.5,2\n");
  CHECK_THROWS(t.add_row({"only"}));
  PlotOptions o;
  o.logx = true;
  auto svg = svg_line_plot({{"s", {1, 10, 100}, {3, 2, 1}}}, o);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("density subcommand") {
  auto d = scratch("density");
  auto r = run_cli({"density", "--alpha", "1", "--x", "0", "--out", d.string()});
  CHECK(r.code == cli::kOk);
  auto csv = lines(slurp(d / "density.csv"));
  REQUIRE(csv.size() == 2);
  CHECK(csv[0] == "x,pdf,cdf");
  CHECK(csv[1] == "0,0.318309886184,0.5");
}

TEST_CASE("exit codes") {
  auto d = scratch("codes");
  CHECK(run_cli({"nonsense"}).code == cli::kUsage);
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"density", "--alpha", "abc", "--out", d.string()}).code == cli::kUsage);
  CHECK(run_cli({"density", "--alpha", "1.5", "--x", "0", "--out", d.string()}).code == cli::kPrecondition);
  CHECK(run_cli({"density", "--alpha", "1", "--delta", "0.2", "--x", "0", "--out", d.string()}).code ==
        cli::kPrecondition);
  CHECK(run_cli({"density", "--alpha", "1", "--x", "0", "--out", "/proc/no/such/dir"}).code == cli::kIo);
  CHECK(run_cli({"density", "--help"}).code == cli::kOk);
}

TEST_CASE("sampling is byte-identical for a fixed seed") {
  auto a = scratch("sample_a"), b = scratch("sample_b");
  run_cli({"sample", "--alpha", "0.5", "--delta", "0.3", "--n", "200", "--seed", "9", "--out", a.string()});
  run_cli({"sample", "--alpha", "0.5", "--delta", "0.3", "--n", "200", "--seed", "9", "--out", b.string()});
  auto sa = slurp(a / "sample.csv");
  CHECK(lines(sa).size() == 201);
  CHECK(sa == slurp(b / "sample.csv"));
}

TEST_CASE("stein residual subcommand") {
  auto d = scratch("stein");
  auto r = run_cli({"stein-residual", "--alpha", "0.5", "--delta", "0", "--h", "clamp-id", "--grid", "-2:2:5",
                    "--out", d.string()});
  REQUIRE(r.code == cli::kOk);
  auto csv = lines(slurp(d / "stein-residual.csv"));
  REQUIRE(csv.size() == 6);
  CHECK(csv[0] == "x,f,fprime,residual");
  for (std::size_t i = 1; i < csv.size(); ++i) {
    double res = std::stod(csv[i].substr(csv[i].rfind(',') + 1));
    CHECK(std::abs(res) <= 5e-3);
  }
}

TEST_CASE("bound curves and fits") {
  auto d = scratch("curves");
  REQUIRE(run_cli({"example1", "--alpha", "0.5", "--nmin", "1e2", "--nmax", "1e6", "--svg", "--out", d.string()}).code ==
          cli::kOk);
  auto csv = lines(slurp(d / "example1.csv"));
  CHECK(csv.size() == 6);
  CHECK(csv[0] == "n,term1,term2,term3,term4,total,model");
  CHECK(fs::exists(d / "example1.svg"));

  auto r = run_cli({"rate-fit", "--n", "100", "1000", "10000", "100000", "--values", "0.01", "0.001", "0.0001",
                    "0.00001", "--rate", "power", "--out", d.string()});
  REQUIRE(r.code == cli::kOk);
  auto fit = lines(slurp(d / "rate-fit.csv"));
  CHECK(fit[0] == "rate_model,points,slope,intercept,residual,degenerate");
  CHECK(fit[1].rfind("power,4,-1,", 0) == 0);

  REQUIRE(run_cli({"appendixB", "--alpha", "1", "--nmin", "10", "--nmax", "1000", "--out", d.string()}).code == cli::kOk);
  auto ab = lines(slurp(d / "appendixB.csv"));
  CHECK(ab[0] == "n,gamma_n,term1,term2,term3,total");
  CHECK(ab[1].rfind("10,35.7715206396,", 0) == 0);
}

TEST_CASE("config file and environment output directory") {
  auto d = scratch("config");
  {
    std::ofstream cfg(d / "c.json");
    cfg << R"({"alpha": 1, "x": [0, 1], "delta": 0})";
  }
  auto r = run_cli({"density", "--config", (d / "c.json").string(), "--out", d.string()});
  REQUIRE(r.code == cli::kOk);
  auto csv = lines(slurp(d / "density.csv"));
  REQUIRE(csv.size() == 3);
  CHECK(csv[2] == "1,0.159154943092,0.75");
  // explicit flags win over the config
  run_cli({"density", "--config", (d / "c.json").string(), "--x", "2", "--out", d.string()});
  CHECK(lines(slurp(d / "density.csv")).size() == 2);

  auto e = scratch("env");
  setenv(cli::kOutputDirEnv, e.string().c_str(), 1);
  CHECK(run_cli({"density", "--alpha", "1", "--x", "0"}).code == cli::kOk);
  unsetenv(cli::kOutputDirEnv);
  CHECK(fs::exists(e / "density.csv"));
}

TEST_CASE("selftests") {
  for (auto name : {"density", "rate-fit", "appendixB", "bound-curve"}) {
    auto r = run_cli({name, "--selftest"});
    CAPTURE(name);
    CAPTURE(r.out);
    CHECK(r.code == cli::kOk);
  }
}
