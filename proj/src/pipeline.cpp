#include "reflow/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

#include "reflow/text.hpp"

namespace reflow {

namespace {

std::string table_text(const IntervalTable& t, const VarRegistry& vars) {
  std::string out = "table " + vars.arith(t.property).name + " [" + std::to_string(t.min_val) + ", " +
                    std::to_string(t.max_val) + "]\n";
  for (const auto& row : t.rows) {
    out += "  [" + std::to_string(row.lo) + ", " + std::to_string(row.hi) + "] weight " + std::to_string(row.weight);
    for (const auto& [b, v] : row.assignment) out += std::string(" ") + (v ? "" : "!") + vars.boolean(b).name;
    out += "\n";
  }
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
}

ConflictReport conflict_from(const ConflictError& e, const Formula& f) {
  ConflictReport r;
  r.core = e.origins();
  if (r.core.empty()) r.core.push_back("screen");
  r.groups = group_conflicts(r.core, f);
  r.text = std::string(e.what()) + "\n" + report_conflicts(r.core, f);
  return r;
}

PreviewStatus merge(PreviewStatus a, PreviewStatus b) { return a > b ? a : b; }

}  // namespace

std::unique_ptr<Backend> pipeline_backend(const BuildOptions& options) {
  std::string name = options.backend;
  if (name == "auto" || name == "local") name = ExternalBackend::available(options.external) ? "hybrid" : "oracle";
  return make_backend(name, options.external);
}

BuildReport build_pipeline(const LayoutSpec& spec, const BuildOptions& options) {
  BuildReport rep;
  CompiledLayout layout = compile_layout(spec);
  const Formula& f = layout.formula;
  rep.widgets = layout.ids.size();
  rep.clauses = f.hard.size();
  rep.softs = f.soft.size();
  rep.log.push_back("compiled " + std::to_string(rep.widgets) + " widgets, " + std::to_string(f.vars.arith_count()) +
                    " arithmetic / " + std::to_string(f.vars.bool_count()) + " boolean variables, " +
                    std::to_string(rep.clauses) + " hard clauses, " + std::to_string(rep.softs) + " softs");
  auto backend = pipeline_backend(options);
  PreviewOptions popt = options.preview;
  popt.search.seed = options.seed;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return " (" + std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count()) + " ms)";
  };
  // Inner layer first. A slice whose feasible sizes have a hole cannot be
  // summarised by a range; it goes back into the outer layer.
  Extraction ex;
  std::set<std::string> excluded;
  std::map<std::string, IndependentSlice> previewed;
  for (bool retry = true; retry;) {
    retry = false;
    try {
      if (options.extract) {
        ex = extract_independent_widgets(f, layout, *backend, spec.config.threshold, excluded, previewed);
      } else {
        ex.outer = f;
      }
    } catch (const ConflictError& e) {
      rep.status = PreviewStatus::conflict;
      rep.conflict = conflict_from(e, f);
      return rep;
    }
    for (auto& s : ex.slices) {
      if (previewed.count(s.widget)) continue;
      const auto& v = layout.vars[s.index];
      for (int axis = 0; axis < 2 && !retry; ++axis) {
        IntervalTable& table = axis == 0 ? s.width : s.height;
        const ArithId p = axis == 0 ? v.w : v.h;
        PreviewOptions o = popt;
        o.from.reset();
        o.to.reset();
        PreviewResult r = preview_sweep(s.formula, p, table, *backend, o);
        if (r.status == PreviewStatus::conflict) {
          rep.log.push_back("widget " + s.widget + " kept in the outer layer: no layout at " + f.vars.arith(p).name +
                            " = " + std::to_string(r.conflict->at));
          excluded.insert(s.widget);
          retry = true;
          break;
        }
        rep.status = merge(rep.status, r.status);
        for (const auto& c : r.repairs) s.formula.hard.push_back(c);
        for (const auto& rec : r.repair_log) {
          rep.log.push_back("repaired " + f.vars.arith(p).name + " at " + std::to_string(rec.at));
        }
        table = r.table;
        rep.sweeps.push_back({f.vars.arith(p).name, std::move(r)});
      }
      if (retry) break;
      previewed.emplace(s.widget, s);
    }
  }
  for (const auto& s : ex.slices) {
    rep.log.push_back("independent widget " + s.widget + ": " + std::to_string(s.clause_count) + " clauses, width [" +
                      std::to_string(s.width.min_val) + ", " + std::to_string(s.width.max_val) + "] in " +
                      std::to_string(s.width.rows.size()) + " rows, height [" + std::to_string(s.height.min_val) +
                      ", " + std::to_string(s.height.max_val) + "] in " + std::to_string(s.height.rows.size()) +
                      " rows");
  }
  rep.log.push_back("inner layer done" + elapsed());

  // outer layer
  Formula& outer = ex.outer;
  std::vector<SoftLiteral> related = related_softs(outer, layout.screen_width);
  for (const auto& soft : outer.soft) {
    if (std::find(related.begin(), related.end(), soft) == related.end()) {
      throw SpecError("soft '" + f.vars.boolean(soft.var).name + "' is unrelated to any size property");
    }
  }
  IntervalTable table;
  try {
    table = soft_constraints_hardening(outer, layout.screen_width, *backend, {.related = related, .extra = {}});
  } catch (const ConflictError& e) {
    rep.status = PreviewStatus::conflict;
    rep.conflict = conflict_from(e, outer);
    return rep;
  }
  rep.log.push_back("outer table hardened" + elapsed());
  PreviewOptions o = popt;
  o.from = spec.max_width;
  o.to = spec.min_width;
  PreviewResult r = preview_sweep(outer, layout.screen_width, table, *backend, o);
  rep.status = merge(rep.status, r.status);
  if (r.status == PreviewStatus::conflict) {
    rep.conflict = r.conflict;
    rep.sweeps.push_back({"outer", std::move(r)});
    return rep;
  }
  for (const auto& c : r.repairs) outer.hard.push_back(c);
  for (const auto& rec : r.repair_log) rep.log.push_back("repaired outer at " + std::to_string(rec.at));
  table = r.table;
  rep.sweeps.push_back({"outer", std::move(r)});
  rep.outer_clauses = outer.hard.size();
  rep.log.push_back("outer formula: " + std::to_string(outer.hard.size()) + " hard clauses, " +
                    std::to_string(table.rows.size()) + " interval rows" + elapsed());

  BundleInputs in;
  in.layout = &layout;
  in.spec = &spec;
  in.outer = &outer;
  in.table = &table;
  in.slices = ex.slices;
  rep.bundle = build_bundle(in);

  if (!options.audit_dir.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir(options.audit_dir);
    fs::create_directories(dir);
    write_file(dir / "compiled.formula", dump_formula(f));
    write_file(dir / "outer.formula", dump_formula(outer));
    write_file(dir / "outer.table", table_text(table, f.vars));
    for (const auto& s : ex.slices) {
      write_file(dir / (s.widget + ".formula"), dump_formula(s.inner()));
      write_file(dir / (s.widget + ".table"), table_text(s.width, f.vars) + table_text(s.height, f.vars));
    }
    std::string log;
    for (const auto& line : rep.log) log += line + "\n";
    write_file(dir / "build.log", log);
  }
  return rep;
}

}  // namespace reflow
