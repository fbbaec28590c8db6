#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmp_nlp/builtins.hpp"
#include "mmp_nlp/config.hpp"
#include "mmp_nlp/diagnostics.hpp"
#include "mmp_nlp/poly.hpp"
#include "mmp_nlp/runner.hpp"
#include "mmp_nlp/simple_set.hpp"

namespace py = pybind11;
using namespace mmp_nlp;

namespace {

Method method_from(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw py::value_error("unknown method: " + name);
  return *m;
}

// (summary json text, trace csv text)
py::tuple run_loaded(const LoadedProblem& loaded) {
  check_compatibility(loaded);
  MethodRun result;
  {
    py::gil_scoped_release release;
    result = execute(loaded);
  }
  return py::make_tuple(summary_json(loaded, result), trace_csv(result.run));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Moving balls, ESQM and Sl1QP on small polynomial programs";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<Polynomial>(m, "Polynomial")
      .def_property_readonly("dimension", &Polynomial::dimension)
      .def_property_readonly("degree", &Polynomial::degree)
      .def("__call__", [](const Polynomial& p, const Vector& x) { return eval_poly(p, x); })
      .def("gradient", [](const Polynomial& p, const Vector& x) { return eval_gradient(grad_poly(p), x); })
      .def("lipschitz_bound",
           [](const Polynomial& p, const Vector& lower, const Vector& upper) {
             return lipschitz_grad_bound(p, AxisBox{lower, upper});
           })
      .def("__eq__", [](const Polynomial& a, const Polynomial& b) { return a == b; })
      .def("__str__", &Polynomial::to_string)
      .def("__repr__", [](const Polynomial& p) { return "Polynomial('" + p.to_string() + "')"; });
  m.def("parse_polynomial", &parse_polynomial, py::arg("text"), py::arg("dimension"));

  py::class_<SimpleSet>(m, "SimpleSet")
      .def_static("whole_space", &SimpleSet::whole_space)
      .def_static("box", &SimpleSet::box)
      .def_static("ball", &SimpleSet::ball)
      .def_static("simplex", &SimpleSet::simplex)
      .def_static("simplex_cap", &SimpleSet::simplex_cap)
      .def_static("nonneg_orthant", &SimpleSet::nonneg_orthant)
      .def_property_readonly("dimension", &SimpleSet::dimension)
      .def("__repr__", &SimpleSet::name);
  m.def("project", &project, py::arg("q"), py::arg("z"));
  m.def("contains", &contains, py::arg("q"), py::arg("x"), py::arg("tol") = 0.0);
  m.def("stationarity_residual", &stationarity_residual, py::arg("q"), py::arg("x"), py::arg("v"));

  m.def("builtin_names", [] {
    std::vector<std::string> names;
    for (const Builtin& b : builtin_registry()) names.push_back(b.name);
    return names;
  });
  m.def("builtin_methods", [](const std::string& name) {
    const Builtin* b = find_builtin(name);
    if (b == nullptr) throw py::key_error(name);
    std::vector<std::string> methods;
    for (Method method : b->methods) methods.emplace_back(method_name(method));
    return methods;
  });
  m.def("list_problems", &list_problems);

  m.def(
      "_run_builtin",
      [](const std::string& name, const std::string& method) {
        const Builtin* b = find_builtin(name);
        if (b == nullptr) throw py::key_error(name);
        return run_loaded(builtin_config(*b, method_from(method)));
      },
      py::arg("name"), py::arg("method"));
  m.def(
      "_run_config", [](const std::string& text) { return run_loaded(parse_config(text)); }, py::arg("text"));

  m.def(
      "estimate_rate",
      [](const std::vector<double>& distances, double threshold) {
        const RateEstimate e = estimate_rate_from_distances(distances, threshold);
        py::dict d;
        d["regime"] = to_string(e.regime);
        d["q"] = e.q;
        d["gamma"] = e.gamma;
        d["fit_quality"] = e.fit_quality;
        return d;
      },
      py::arg("distances"), py::arg("threshold") = 0.9);
}
