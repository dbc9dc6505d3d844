// Python bindings: scenarios, fluxes, the upwind solver, DMD and hodograph utilities.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "shockrom/dmd.hpp"
#include "shockrom/error.hpp"
#include "shockrom/flux.hpp"
#include "shockrom/hfm.hpp"
#include "shockrom/hodograph.hpp"
#include "shockrom/scenario.hpp"

namespace py = pybind11;
using namespace shockrom;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Scenario scenario_from(const std::string& name, const py::object& overrides) {
  Scenario s = find_scenario(name);
  if (!overrides.is_none()) s = Scenario::from_json(from_python(overrides), s);
  return s;
}

py::dict run_scenario(const std::string& name, const std::string& pipeline, const py::object& overrides) {
  const Scenario s = scenario_from(name, overrides);
  RunOutput out;
  {
    py::gil_scoped_release release;
    out = run(s, parse_pipeline(pipeline));
  }
  std::vector<std::vector<double>> refs, preds;
  for (const auto& f : out.references) refs.push_back(f.values);
  for (const auto& f : out.predictions) preds.push_back(f.values);
  py::dict d;
  d["scenario"] = to_python(out.scenario.to_json());
  d["times"] = out.times;
  d["x"] = s.grid().nodes();
  d["references"] = refs;
  d["predictions"] = preds;
  d["diagnostics"] = to_python(out.diagnostics);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reduced-order models for 1-D scalar conservation laws with shocks";

  static py::exception<Error> error(m, "ShockromError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<FluxModel>(m, "FluxModel")
      .def_static("burgers", &FluxModel::burgers)
      .def_static("buckley_leverett", &FluxModel::buckley_leverett, py::arg("mobility"))
      .def_property_readonly("name", &FluxModel::name)
      .def("flux", &FluxModel::flux)
      .def("speed", &FluxModel::speed)
      .def("shock_speed", &FluxModel::shock_speed);

  py::class_<HullConstruction>(m, "HullConstruction")
      .def_readonly("front_saturation", &HullConstruction::front_saturation)
      .def_readonly("front_speed", &HullConstruction::front_speed);
  m.def("welge_front", [](const FluxModel& f, double ul, double ur) { return welge_front(f, ul, ur); },
        py::arg("model"), py::arg("u_left"), py::arg("u_right"));

  m.def(
      "upwind",
      [](std::vector<double> x, std::vector<double> u0, const FluxModel& model, double t_end, std::size_t steps) {
        if (x.size() != u0.size() || x.size() < 2) throw std::invalid_argument("x and u0 must match, size >= 2");
        EulerianField field(Grid1D(x.front(), x.back(), x.size()), 0.0, std::move(u0));
        const BoundaryStates ghosts{field.values.front(), field.values.back()};
        const double dt = t_end / static_cast<double>(steps);
        for (std::size_t n = 0; n < steps; ++n) field = upwind_step(field, model, dt, ghosts);
        return field.values;
      },
      py::arg("x"), py::arg("u0"), py::arg("model"), py::arg("t_end"), py::arg("steps"),
      "Upwind finite-volume solution at t_end on the uniform grid spanned by x, with constant ghost states.");

  m.def(
      "dmd_eigenvalues",
      [](const Eigen::MatrixXd& snapshots, double dt, double eps) {
        return fit(SnapshotMatrix(snapshots, dt, 0.0), eps).eigenvalues();
      },
      py::arg("snapshots"), py::arg("dt") = 1.0, py::arg("eps") = 1e-4,
      "Eigenvalues of the exact-DMD fit of column snapshots.");

  m.def(
      "shock_formation_time",
      [](std::vector<double> x, std::vector<double> u, const FluxModel& model) {
        const auto f = shock_formation_time(invert_samples(x, u, x.size()), model);
        return py::make_tuple(f.t_star, f.u_star);
      },
      py::arg("x"), py::arg("u"), py::arg("model"),
      "(t*, u*) of a strictly monotone sampled profile; t* is inf when it only spreads.");

  m.def("scenarios", [] {
    std::vector<std::string> names;
    for (const auto& s : builtin_scenarios()) names.push_back(s.name);
    return names;
  });
  m.def("scenario", [](const std::string& name, const py::object& o) { return to_python(scenario_from(name, o).to_json()); },
        py::arg("name"), py::arg("overrides") = py::none());
  m.def("run", &run_scenario, py::arg("name"), py::arg("pipeline") = "physics-dmd",
        py::arg("overrides") = py::none(),
        "Runs a preset (optionally overridden) and returns times, grid, reference and ROM fields and diagnostics.");
}
