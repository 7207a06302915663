#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mollow/config.hpp"
#include "mollow/dynamics.hpp"
#include "mollow/error.hpp"
#include "mollow/experiment.hpp"
#include "mollow/segmented.hpp"
#include "mollow/sideband.hpp"

namespace py = pybind11;
using namespace mollow;

namespace {

py::dict peak_dict(const LorentzianPeak& p) {
  py::dict d;
  d["center"] = p.center;
  d["fwhm"] = p.fwhm;
  d["area"] = p.area;
  return d;
}

SpectrumTrace make_trace(std::vector<double> omega, std::vector<double> values) {
  if (omega.size() != values.size()) throw InvalidArgument("omega and values differ in length");
  SpectrumTrace t;
  t.omega = std::move(omega);
  t.values = std::move(values);
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Driven quantum dot-cavity simulator";

  auto& error = py::register_exception<Error>(m, "MollowError");
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  py::enum_<Frame>(m, "Frame").value("lab", Frame::lab).value("displaced", Frame::displaced);
  py::enum_<DriveTarget>(m, "DriveTarget").value("cavity", DriveTarget::cavity).value("qubit", DriveTarget::qubit);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("delta_c", &SystemParams::delta_c)
      .def_readwrite("delta_x", &SystemParams::delta_x)
      .def_readwrite("g", &SystemParams::g)
      .def_readwrite("kappa", &SystemParams::kappa)
      .def_readwrite("gamma", &SystemParams::gamma)
      .def_readwrite("gamma_d", &SystemParams::gamma_d)
      .def_readwrite("gamma_ph_ads", &SystemParams::gamma_ph_ads)
      .def_readwrite("gamma_ph_asp", &SystemParams::gamma_ph_asp)
      .def_readwrite("drive_J", &SystemParams::drive_J)
      .def_readwrite("omega_direct", &SystemParams::omega_direct)
      .def_readwrite("drive_target", &SystemParams::drive_target)
      .def_readwrite("fock_dim", &SystemParams::fock_dim)
      .def_readwrite("frame", &SystemParams::frame)
      .def_readwrite("uncoupled", &SystemParams::uncoupled)
      .def_property_readonly("delta_cx", &SystemParams::delta_cx)
      .def("validate", &SystemParams::validate);

  m.def("vacuum_rabi_splitting", &vacuum_rabi_splitting, py::arg("g"), py::arg("kappa"));
  m.def("estimated_rabi", &estimated_rabi, py::arg("params"));

  m.def(
      "simulate_spectrum",
      [](const SystemParams& p, double omega_min, double omega_max, double spacing, std::optional<double> t_max) {
        SimulationSettings s;
        s.grid = {omega_min, omega_max, spacing};
        s.t_max = t_max;
        s.observable = default_observable(p);
        SimulatedSpectrum r;
        {
          py::gil_scoped_release release;
          r = simulate_spectrum(p, s);
        }
        py::dict d;
        d["omega"] = r.trace.omega;
        d["values"] = r.trace.values;
        d["coherent_amplitude"] = r.trace.coherent_amplitude;
        d["t_max"] = r.t_max;
        d["fock_dim"] = r.fock_dim;
        d["cavity_photons"] = r.cavity_photons;
        d["excited_population"] = r.excited_population;
        d["top_fock_population"] = r.top_fock_population;
        return d;
      },
      py::arg("params"), py::arg("omega_min") = -150.0, py::arg("omega_max") = 150.0, py::arg("spacing") = 0.1,
      py::arg("t_max") = py::none());

  m.def(
      "fit_lower_sideband",
      [](std::vector<double> omega, std::vector<double> values, std::optional<double> center_hint) {
        const SidebandLinewidth r = fit_lower_sideband(make_trace(std::move(omega), std::move(values)), center_hint);
        py::dict d;
        d["sideband"] = peak_dict(r.sideband);
        d["central"] = peak_dict(r.central);
        d["converged"] = r.fit.converged;
        return d;
      },
      py::arg("omega"), py::arg("values"), py::arg("center_hint") = py::none());

  m.def(
      "fit_segmented",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const SegmentedFit f = fit_segmented(x, y);
        py::dict d;
        d["breakpoint"] = f.breakpoint;
        d["slope_below"] = f.slope_below;
        d["slope_above"] = f.slope_above;
        d["p_value"] = f.p_value;
        d["single_line_r_squared"] = f.single.r_squared;
        return d;
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "locate_breakpoint",
      [](const std::vector<double>& x, const std::vector<double>& y, double alpha) {
        return locate_breakpoint(x, y, alpha);
      },
      py::arg("x"), py::arg("y"), py::arg("alpha") = 0.01);

  m.def("preset_names", &preset_names);
  m.def("preset_text", &preset_text, py::arg("name"));
  m.def(
      "run_config",
      [](const std::string& text, const std::string& output_dir) {
        RunConfig config = parse_config(text);
        if (!output_dir.empty()) config.output_dir = output_dir;
        config.validate();
        RunSummary s;
        {
          py::gil_scoped_release release;
          s = run(config);
        }
        py::dict d;
        d["csv"] = s.csv;
        d["metadata"] = s.metadata;
        d["plots"] = s.plots;
        d["points"] = s.points;
        d["failures"] = s.failures;
        d["spot_check_passed"] = s.spot_check.passed();
        d["exit_code"] = s.exit_code();
        return d;
      },
      py::arg("text"), py::arg("output_dir") = "");
}
