#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "capshock/contour.hpp"
#include "capshock/errors.hpp"
#include "capshock/evans.hpp"
#include "capshock/io.hpp"
#include "capshock/profile.hpp"
#include "capshock/sweep.hpp"

namespace py = pybind11;
using namespace capshock;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Profiles, Evans functions and winding numbers for capillarity shocks";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.attr("FORMAT_VERSION") = kFormatVersion;

  py::class_<GasParams>(m, "GasParams")
      .def(py::init(&GasParams::make), py::arg("gamma"), py::arg("v_plus"), py::arg("d"),
           py::arg("v_minus") = 1.0)
      .def_readonly("gamma", &GasParams::gamma)
      .def_readonly("v_plus", &GasParams::v_plus)
      .def_readonly("v_minus", &GasParams::v_minus)
      .def_readonly("d", &GasParams::d)
      .def_readonly("a", &GasParams::a)
      .def_readonly("epsilon", &GasParams::epsilon)
      .def_readonly("d_star", &GasParams::d_star)
      .def_readonly("mach", &GasParams::mach);

  py::class_<ProfileSolution, std::shared_ptr<ProfileSolution>>(m, "Profile")
      .def_readonly("params", &ProfileSolution::params)
      .def_readonly("x", &ProfileSolution::grid)
      .def_readonly("v", &ProfileSolution::v_hat)
      .def_readonly("v_x", &ProfileSolution::w_hat)
      .def_readonly("v_xx", &ProfileSolution::v_hat_xx)
      .def_readonly("residual_norm", &ProfileSolution::residual_norm)
      .def_property_readonly("classification",
                             [](const ProfileSolution& p) { return std::string(to_string(p.classification)); });

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("sup_slope", &ValidationReport::sup_slope)
      .def_readonly("slope_bound", &ValidationReport::slope_bound)
      .def_readonly("slope_bound_ok", &ValidationReport::slope_bound_ok)
      .def_readonly("phi_bound", &ValidationReport::phi_bound)
      .def_readonly("phi_bound_ok", &ValidationReport::phi_bound_ok)
      .def_readonly("argmax_on_phi_curve", &ValidationReport::argmax_on_phi_curve)
      .def_readonly("lyapunov_monotone", &ValidationReport::lyapunov_monotone)
      .def_property_readonly("passed", &ValidationReport::passed);

  m.def(
      "solve_profile",
      [](const GasParams& p, double L_minus, double L_plus, double max_L) {
        MeshOptions mesh;
        mesh.L_minus = L_minus;
        mesh.L_plus = L_plus;
        mesh.max_L = max_L;
        py::gil_scoped_release release;
        return std::make_shared<ProfileSolution>(solve_profile(p, mesh));
      },
      py::arg("params"), py::arg("L_minus") = -25.0, py::arg("L_plus") = 25.0, py::arg("max_L") = 400.0);
  m.def("validate", [](const ProfileSolution& s) { return validate(s); });

  m.def(
      "evans",
      [](const std::shared_ptr<ProfileSolution>& s, cdouble lambda) {
        py::gil_scoped_release release;
        return EvansSystem(std::shared_ptr<const ProfileSolution>(s)).evaluate(lambda).value;
      },
      py::arg("profile"), py::arg("lambda_"));

  m.def(
      "winding",
      [](const std::shared_ptr<ProfileSolution>& s, double radius, int jobs) {
        ContourResult r;
        {
          py::gil_scoped_release release;
          const EvansSystem sys{std::shared_ptr<const ProfileSolution>(s)};
          ContourSpec spec;
          spec.radius = radius > 0.0 ? radius : default_radius(*s);
          r = evans_contour(sys, spec, {jobs, false});
        }
        std::vector<cdouble> lambdas, values;
        for (const auto& x : r.samples) {
          lambdas.push_back(x.lambda);
          values.push_back(x.value);
        }
        return py::make_tuple(r.winding, lambdas, values);
      },
      py::arg("profile"), py::arg("radius") = 0.0, py::arg("jobs") = 1,
      "Returns (winding, lambdas, values) around the closed contour.");

  m.def(
      "run_point",
      [](double gamma, double v_plus, double d) {
        PointConfig c;
        c.gamma = gamma;
        c.v_plus = v_plus;
        c.d = d;
        py::gil_scoped_release release;
        return record_to_text(run_point(c));
      },
      py::arg("gamma"), py::arg("v_plus"), py::arg("d"),
      "Runs one sweep point and returns its record file text.");

  m.def(
      "emit_figure_data",
      [](double gamma, double v_plus, double d, const std::filesystem::path& dir) {
        PointConfig c;
        c.gamma = gamma;
        c.v_plus = v_plus;
        c.d = d;
        py::gil_scoped_release release;
        return emit_figure_data(run_point_detailed(c), dir);
      },
      py::arg("gamma"), py::arg("v_plus"), py::arg("d"), py::arg("out_dir"));
}
