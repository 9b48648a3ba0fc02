#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "modal/driver.hpp"
#include "modal/oracle.hpp"

namespace py = pybind11;
using namespace modal;

PYBIND11_MODULE(_modal, m) {
  m.doc() = "Mode checker for a small HAL subset";

  py::class_<Diagnostic>(m, "Diagnostic")
      .def_readonly("code", &Diagnostic::code)
      .def_readonly("message", &Diagnostic::message)
      .def_readonly("context", &Diagnostic::context)
      .def_property_readonly("severity", [](const Diagnostic& d) { return d.is_error() ? "error" : "warning"; })
      .def_property_readonly("line", [](const Diagnostic& d) { return d.pos.line; })
      .def_property_readonly("col", [](const Diagnostic& d) { return d.pos.col; })
      .def("__str__", &Diagnostic::str)
      .def("__repr__", [](const Diagnostic& d) { return "<Diagnostic " + d.str() + ">"; });

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("output", &CheckReport::output)
      .def_readonly("diagnostics", &CheckReport::diagnostics)
      .def_readonly("exit_code", &CheckReport::exit_code)
      .def_property_readonly("procedures", [](const CheckReport& r) {
        std::vector<std::string> names;
        for (const auto& p : r.procedures) names.push_back(p.name);
        return names;
      });

  py::class_<DumpReport>(m, "DumpReport")
      .def_readonly("output", &DumpReport::output)
      .def_readonly("diagnostics", &DumpReport::diagnostics)
      .def_readonly("exit_code", &DumpReport::exit_code);

  py::class_<OracleReport>(m, "OracleReport")
      .def_readonly("samples", &OracleReport::samples)
      .def_readonly("passed", &OracleReport::passed)
      .def_readonly("failed", &OracleReport::failed)
      .def_readonly("failures", &OracleReport::failures)
      .def_property_readonly("total_failed", &OracleReport::total_failed)
      .def("summary", &OracleReport::summary);

  m.def(
      "check",
      [](const std::string& source, bool init, bool poly_improve, bool werror) {
        Options o;
        o.init = init;
        o.poly_improve = poly_improve;
        o.werror = werror;
        py::gil_scoped_release release;
        return check_source(source, o);
      },
      py::arg("source"), py::arg("init") = true, py::arg("poly_improve") = true, py::arg("werror") = false,
      "Mode checks program text and returns the reordered procedures and diagnostics.");

  m.def(
      "dump_ti",
      [](const std::string& source, const std::string& type, const std::string& inst) {
        py::gil_scoped_release release;
        return dump_ti(source, type, inst);
      },
      py::arg("source"), py::arg("type"), py::arg("inst"), "Prints the ti-grammar of a type and instantiation.");

  m.def(
      "run_oracle",
      [](int depth, std::size_t samples, std::uint64_t seed) {
        py::gil_scoped_release release;
        return run_oracle(depth, samples, seed);
      },
      py::arg("depth") = 4, py::arg("samples") = 1000, py::arg("seed") = 2024,
      "Checks the grammar lattice operations against bounded enumeration.");
}
