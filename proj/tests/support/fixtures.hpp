#pragma once

#include <map>
#include <string>

#include "reflow/layout.hpp"
#include "reflow/localsmt.hpp"
#include "reflow/pipeline.hpp"

namespace reflow::testing {

inline std::string fixture_path(const std::string& name) { return std::string(REFLOW_FIXTURES) + "/" + name + ".json"; }

inline LayoutSpec fixture(const std::string& name) { return load_spec(fixture_path(name)); }

/// Builds once per process; the conflict fixture has no bundle.
inline const BuildReport& built(const std::string& name, bool extract = true) {
  static std::map<std::pair<std::string, bool>, BuildReport> cache;
  auto key = std::make_pair(name, extract);
  auto it = cache.find(key);
  if (it == cache.end()) {
    BuildOptions o;
    o.extract = extract;
    it = cache.emplace(key, build_pipeline(fixture(name), o)).first;
  }
  return it->second;
}

inline const DeployBundle& bundle_of(const std::string& name, bool extract = true) {
  const auto& r = built(name, extract);
  if (!r.bundle) throw Error("fixture " + name + " has no bundle");
  return *r.bundle;
}

/// Hard-only model of a compiled layout at one screen width, or nullopt.
inline std::optional<Model> solve_layout(const CompiledLayout& L, std::int64_t width, const BoolAssignment& fixed = {}) {
  ParametricSolver s(L.formula, fixed, {L.screen_width});
  SearchConfig cfg;
  cfg.budget_ms = 2000;
  auto r = s.solve({{L.screen_width, width}}, nullptr, cfg);
  if (r.status != Status::sat) return std::nullopt;
  return r.model;
}

inline std::int64_t val(const Model& m, const CompiledLayout& L, const std::string& name) {
  return *m.get(L.formula.vars.arith_by_name(name));
}

inline bool vis(const Model& m, const CompiledLayout& L, const std::string& id) {
  return *m.get(L.formula.vars.bool_by_name(id + ".v"));
}

}  // namespace reflow::testing
