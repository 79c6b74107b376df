#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stablestein/bounds.hpp"
#include "stablestein/frac_ops.hpp"
#include "stablestein/gclt.hpp"
#include "stablestein/metrics.hpp"
#include "stablestein/stable_core.hpp"
#include "stablestein/stable_law.hpp"
#include "stablestein/stein_solver.hpp"
#include "stablestein/test_functions.hpp"

namespace py = pybind11;
using namespace stablestein;

namespace {

StableParams params(double alpha, double delta) { return StableParams(alpha, delta); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stable laws, their Stein equation and normal-attraction bounds";

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  m.def("d_alpha", &d_alpha, py::arg("alpha"));
  m.def("pdf", [](double a, double d, double x) { return pdf(params(a, d), 1.0, x); },
        py::arg("alpha"), py::arg("delta"), py::arg("x"));
  m.def("cdf", [](double a, double d, double x) { return cdf(params(a, d), 1.0, x); },
        py::arg("alpha"), py::arg("delta"), py::arg("x"));
  m.def("quantile", [](double a, double d, double u) { return StableLaw::get(params(a, d))->quantile(u); },
        py::arg("alpha"), py::arg("delta"), py::arg("u"));
  m.def("sample", [](double a, double d, std::size_t n, std::uint64_t seed) { return sample(params(a, d), n, seed); },
        py::arg("alpha"), py::arg("delta"), py::arg("n"), py::arg("seed") = 1);

  m.def("test_function_names", &test_function_names);
  m.def(
      "apply_L",
      [](double a, double d, std::function<double(double)> f, double x, bool oscillatory) {
        Evaluand e{std::move(f), {}, oscillatory ? FarField::kOscillatory : FarField::kSmooth, {}};
        return apply_L(params(a, d), e, x);
      },
      py::arg("alpha"), py::arg("delta"), py::arg("f"), py::arg("x"), py::arg("oscillatory") = false);
  m.def(
      "apply_L_cos",
      [](double a, double d, double lam, double x) {
        Evaluand e{[lam](double y) { return std::cos(lam * y); }, [lam](double y) { return -lam * std::sin(lam * y); },
                   FarField::kOscillatory, {}};
        return apply_L(params(a, d), e, x);
      },
      py::arg("alpha"), py::arg("delta"), py::arg("lam"), py::arg("x"));

  py::class_<SteinSolution>(m, "SteinSolution")
      .def(py::init([](double a, double d, const std::string& h, double beta) {
             return SteinSolution(params(a, d), test_function_by_name(h, beta));
           }),
           py::arg("alpha"), py::arg("delta"), py::arg("h"), py::arg("beta") = 0.25)
      .def("value", &SteinSolution::value)
      .def("derivative", &SteinSolution::derivative)
      .def("residual", &SteinSolution::residual)
      .def_property_readonly("eh_z", &SteinSolution::eh_z);

  m.def("d_kol_empirical",
        [](std::vector<double> xs, double a, double d) { return d_kol_empirical(SampleSet(std::move(xs)), params(a, d)); },
        py::arg("samples"), py::arg("alpha"), py::arg("delta"));
  m.def("kolmogorov_se", &kolmogorov_se);

  py::enum_<ModelFamily>(m, "ModelFamily")
      .value("PARETO", ModelFamily::kPareto)
      .value("MIXED", ModelFamily::kMixed)
      .value("LOGTAIL", ModelFamily::kLogTail)
      .value("KNOTS", ModelFamily::kKnots);

  py::class_<AttractionModel>(m, "AttractionModel")
      .def_static("pareto", &AttractionModel::pareto, py::arg("alpha"), py::arg("delta") = 0.0)
      .def_static("mixed", &AttractionModel::mixed, py::arg("alpha"), py::arg("alpha_tilde"), py::arg("A"),
                  py::arg("A_tilde"), py::arg("delta") = 0.0)
      .def_static("logtail", &AttractionModel::logtail, py::arg("alpha"))
      .def_static("from_json", &AttractionModel::from_json)
      .def_property_readonly("family", &AttractionModel::family)
      .def_property_readonly("id", &AttractionModel::id)
      .def_property_readonly("alpha", &AttractionModel::alpha)
      .def_property_readonly("delta", &AttractionModel::delta)
      .def_property_readonly("in_domain", &AttractionModel::in_domain)
      .def("eps", &AttractionModel::eps)
      .def("upper_tail", &AttractionModel::upper_tail)
      .def("lower_tail", &AttractionModel::lower_tail)
      .def("density", &AttractionModel::density)
      .def("sample", &AttractionModel::sample, py::arg("n"), py::arg("seed"), py::arg("stream") = 0);

  m.def("sigma_of", &sigma_of);
  m.def("gamma_n", &gamma_n, py::arg("alpha"), py::arg("n"));
  m.def("truncated_mean", [](const AttractionModel& mo, double t) { return truncated_mean(mo, t); });
  m.def("build_Sn", &build_Sn, py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0);
  m.def("build_Sn_replicates", &build_Sn_replicates, py::arg("model"), py::arg("n"), py::arg("replicates"),
        py::arg("seed"), py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("reciprocal_Tn", &reciprocal_Tn, py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0);

  py::class_<BoundBreakdown>(m, "BoundBreakdown")
      .def_readonly("n", &BoundBreakdown::n)
      .def_readonly("t1", &BoundBreakdown::t1)
      .def_readonly("t2", &BoundBreakdown::t2)
      .def_readonly("t3", &BoundBreakdown::t3)
      .def_readonly("remainder", &BoundBreakdown::remainder)
      .def_readonly("total", &BoundBreakdown::total)
      .def_readonly("closed_form", &BoundBreakdown::closed_form);
  m.def(
      "theorem_bound",
      [](const AttractionModel& mo, double n, double beta, bool generic) {
        BoundConfig c;
        c.beta = beta;
        c.generic = generic;
        return theorem_bound(mo, n, c);
      },
      py::arg("model"), py::arg("n"), py::arg("beta") = 0.0, py::arg("generic") = false);
  m.def("bound_appendixB", &bound_appendixB, py::arg("alpha"), py::arg("n"));
  m.def(
      "rate_fit",
      [](const std::vector<double>& n, const std::vector<double>& b, const std::string& model) {
        const auto f = rate_fit(n, b, rate_model_from_name(model));
        return py::make_tuple(f.slope, f.intercept, f.residual, f.degenerate);
      },
      py::arg("n"), py::arg("values"), py::arg("model") = "power");
}
