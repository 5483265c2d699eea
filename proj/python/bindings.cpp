#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reflow/bench.hpp"
#include "reflow/pipeline.hpp"
#include "reflow/runtime.hpp"
#include "reflow/service.hpp"

namespace py = pybind11;
using namespace reflow;

namespace {

py::dict geometry_dict(const Geometry& g, const SolveStats& st) {
  py::list widgets;
  for (const auto& e : g.widgets) {
    widgets.append(py::dict(py::arg("id") = e.id, py::arg("x") = e.x, py::arg("y") = e.y, py::arg("width") = e.width,
                            py::arg("height") = e.height));
  }
  return py::dict(py::arg("width") = g.screen_width, py::arg("row") = st.row, py::arg("geometry") = widgets,
                  py::arg("steps") = st.steps, py::arg("reasoning_reused") = st.reasoning_reused,
                  py::arg("fallback") = st.fallback, py::arg("millis") = st.millis);
}

py::dict build(const std::string& spec_json, const std::string& backend, bool extract) {
  BuildOptions o;
  o.backend = backend;
  o.extract = extract;
  LayoutSpec spec = parse_spec(spec_json);
  BuildReport r;
  {
    py::gil_scoped_release unlocked;
    r = build_pipeline(spec, o);
  }
  py::dict out;
  out["status"] = std::string(preview_status_name(r.status));
  out["log"] = r.log;
  out["bundle"] = r.bundle ? py::object(py::str(serialize_bundle(*r.bundle))) : py::object(py::none());
  out["conflict"] = r.conflict ? py::object(py::str(r.conflict->text)) : py::object(py::none());
  out["core"] = r.conflict ? r.conflict->core : std::vector<std::string>{};
  return out;
}

}  // namespace

PYBIND11_MODULE(_reflow, m) {
  m.attr("__version__") = REFLOW_VERSION;

  py::register_exception<SpecError>(m, "SpecError");
  py::register_exception<BundleError>(m, "BundleError");
  py::register_exception<RangeError>(m, "RangeError");

  m.def("validate", [](const std::string& spec_json) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& d : validate_spec(parse_spec(spec_json))) out.emplace_back(d.widget, d.message);
    return out;
  });
  m.def("compile_counts", [](const std::string& spec_json) {
    CompiledLayout L = compile_layout(parse_spec(spec_json));
    return py::dict(py::arg("widgets") = L.ids.size(), py::arg("hard") = L.formula.hard.size(),
                    py::arg("soft") = L.formula.soft.size(), py::arg("arith") = L.formula.vars.arith_count(),
                    py::arg("bool") = L.formula.vars.bool_count());
  });
  m.def("build", &build, py::arg("spec_json"), py::arg("backend") = "auto", py::arg("extract") = true);
  m.def("benchmark_spec", [] { return spec_to_json(benchmark_spec()); });

  py::class_<RuntimeSession>(m, "Session")
      .def(py::init([](const std::string& bundle_text, const std::string& backend) {
             RuntimeOptions o;
             o.backend = backend;
             return RuntimeSession(parse_bundle(bundle_text), o);
           }),
           py::arg("bundle"), py::arg("backend") = "local")
      .def("solve",
           [](RuntimeSession& s, std::int64_t width) {
             SolveStats st;
             Geometry g = s.solve_at_width(width, &st);
             return geometry_dict(g, st);
           })
      .def("update",
           [](RuntimeSession& s, std::int64_t width) {
             SolveStats st;
             Geometry g = s.incremental_update(width, &st);
             return geometry_dict(g, st);
           })
      .def_property_readonly("min_width", &RuntimeSession::min_width)
      .def_property_readonly("max_width", &RuntimeSession::max_width)
      .def("summary", [](const RuntimeSession& s) { return bundle_summary_json(s.bundle()); });
}
