// reflow command-line driver.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "reflow/bench.hpp"
#include "reflow/pipeline.hpp"
#include "reflow/runtime.hpp"
#include "reflow/service.hpp"
#include "reflow/text.hpp"

using namespace reflow;

namespace {

enum Exit : int { ok = 0, other = 1, invalid = 2, repaired = 3, conflicted = 4 };

struct Common {
  std::string backend = "local";
  std::string solver_exe;
  std::uint64_t seed = 1;
  std::int64_t stride = 1;
  double budget_ms = 20;
  std::string audit_dir;
};

ExternalConfig external_config(const Common& c) {
  ExternalConfig e;
  e.executable = c.solver_exe;
  return e;
}

RuntimeOptions runtime_options(const Common& c) {
  RuntimeOptions o;
  o.backend = c.backend;
  o.search.budget_ms = c.budget_ms;
  o.search.seed = c.seed;
  o.external = external_config(c);
  return o;
}

std::size_t memory_hwm_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) return std::stoull(line.substr(6));
  }
  return 0;
}

void print_diagnostics(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds) {
    std::cerr << (d.level == Diagnostic::Level::error ? "error" : "warning") << ": "
              << (d.widget.empty() ? "" : d.widget + ": ") << d.message << "\n";
  }
}

/// Loads and validates; returns nullopt after printing diagnostics.
std::optional<LayoutSpec> read_spec(const std::string& path) {
  LayoutSpec spec = load_spec(path);
  auto ds = validate_spec(spec);
  print_diagnostics(ds);
  if (has_errors(ds)) return std::nullopt;
  return spec;
}

int cmd_compile(const std::string& path, const std::string& dump) {
  auto spec = read_spec(path);
  if (!spec) return invalid;
  CompiledLayout L = compile_layout(*spec);
  const auto placeholders = std::count(L.kinds.begin(), L.kinds.end(), ContainerKind::placeholder);
  std::cout << "#(W)\t#(V)\t#(hard_c)\t#(P)\t#(soft_c)\n"
            << L.ids.size() << "\t" << 5 * L.ids.size() << "\t" << L.formula.hard.size() << "\t" << placeholders
            << "\t" << L.formula.soft.size() << "\n";
  std::cout << "variables: " << L.formula.vars.arith_count() << " arithmetic, " << L.formula.vars.bool_count()
            << " boolean\n";
  if (!dump.empty()) {
    std::ofstream os(dump);
    if (!os) throw Error("cannot write " + dump);
    os << dump_formula(L.formula);
  }
  return ok;
}

int cmd_build(const Common& c, const std::string& path, const std::string& out, bool monolithic) {
  auto spec = read_spec(path);
  if (!spec) return invalid;
  BuildOptions o;
  o.backend = c.backend == "local" ? "auto" : c.backend;
  o.external = external_config(c);
  o.seed = c.seed;
  o.preview.stride = c.stride;
  o.audit_dir = c.audit_dir;
  o.extract = !monolithic;
  BuildReport r = build_pipeline(*spec, o);
  for (const auto& line : r.log) std::cout << line << "\n";
  if (r.status == PreviewStatus::conflict) {
    std::cerr << r.conflict->text;
    return conflicted;
  }
  save_bundle_file(*r.bundle, out);
  std::cout << "rows:\n";
  for (const auto& row : r.bundle->table.rows) {
    std::cout << "  [" << row.lo << ", " << row.hi << "]";
    for (const auto& [b, v] : row.assignment) {
      if (v) std::cout << " " << r.bundle->vars.boolean(b).name;
    }
    std::cout << "\n";
  }
  std::cout << "bundle written to " << out << " (" << preview_status_name(r.status) << ")\n";
  return r.status == PreviewStatus::repaired ? repaired : ok;
}

int cmd_solve(const Common& c, const std::string& path, std::int64_t width) {
  RuntimeSession s = RuntimeSession::load(path, runtime_options(c));
  SolveStats st;
  Geometry g = s.solve_at_width(width, &st);
  std::cout << std::left << std::setw(24) << "widget" << std::right << std::setw(8) << "x" << std::setw(8) << "y"
            << std::setw(8) << "width" << std::setw(8) << "height" << "\n";
  for (const auto& e : g.widgets) {
    std::cout << std::left << std::setw(24) << e.id << std::right << std::setw(8) << e.x << std::setw(8) << e.y
              << std::setw(8) << e.width << std::setw(8) << e.height << "\n";
  }
  std::cout << "row " << st.row << ", " << std::fixed << std::setprecision(3) << st.millis << " ms, " << st.steps
            << " steps\n";
  return ok;
}

int cmd_sweep(const Common& c, const std::string& path, std::optional<std::int64_t> from,
              std::optional<std::int64_t> to, std::int64_t step, int reps, const std::string& spec_path,
              const std::string& csv) {
  if (step < 1) throw Error("step must be positive");
  DeployBundle bundle = load_bundle_file(path);
  std::optional<CompiledLayout> compiled;
  if (!spec_path.empty()) {
    auto spec = read_spec(spec_path);
    if (!spec) return invalid;
    if (config_hash(*spec) != bundle.config_hash) throw Error("spec does not match the bundle's config hash");
    compiled = compile_layout(*spec);
  }
  Formula outer;
  outer.vars = bundle.vars;
  outer.hard = bundle.outer;
  const std::int64_t hi = std::min(from.value_or(bundle.table.max_val), bundle.table.max_val);
  const std::int64_t lo = std::max(to.value_or(bundle.table.min_val), bundle.table.min_val);

  std::ofstream csv_out;
  if (!csv.empty()) {
    csv_out.open(csv);
    if (!csv_out) throw Error("cannot write " + csv);
    csv_out << "rep,width,row,millis,outer_millis,refine_millis,steps,reasoning_reused,fallback\n";
  }
  double total = 0, worst = 0;
  std::size_t solves = 0, violations = 0, fallbacks = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RuntimeSession s(bundle, runtime_options(c));
    std::int64_t w = hi;
    for (;;) {
      SolveStats st;
      Geometry g = s.incremental_update(w, &st);
      total += st.millis;
      worst = std::max(worst, st.millis);
      ++solves;
      fallbacks += st.fallback;
      Model m = geometry_model(bundle, g, s.model());
      if (!violated_clauses(outer, m).empty()) ++violations;
      else if (compiled && !violated_clauses(compiled->formula, m).empty()) ++violations;
      if (csv_out) {
        csv_out << rep << "," << w << "," << st.row << "," << st.millis << "," << st.outer_millis << ","
                << st.refine_millis << "," << st.steps << "," << st.reasoning_reused << "," << st.fallback << "\n";
      }
      if (w - step < lo) break;
      w -= step;
    }
  }
  std::cout << std::fixed << std::setprecision(3);
  std::cout << "widths [" << lo << ", " << hi << "] step " << step << ", " << reps << " runs, " << solves << " solves\n";
  std::cout << "interaction time ms: " << total / static_cast<double>(solves) << " (" << worst << ")\n";
  std::cout << "complete-backend fallbacks: " << fallbacks << "\n";
  std::cout << "memory high-water: " << memory_hwm_kb() / 1024.0 << " MiB\n";
  std::cout << "hard violations: " << violations << (compiled ? "" : " (outer clauses only; pass --spec for all)")
            << "\n";
  return violations ? other : ok;
}

int cmd_serve(const Common& c, const std::string& path, int port) {
  ServiceOptions so;
  so.port = port;
  Service svc(RuntimeSession::load(path, runtime_options(c)), so);
  svc.start();
  std::cout << "serving on http://127.0.0.1:" << svc.port() << std::endl;
  svc.wait();
  return ok;
}

int cmd_generate(const std::string& out) {
  LayoutSpec spec = benchmark_spec();
  std::ofstream os(out);
  if (!os) throw Error("cannot write " + out);
  os << spec_to_json(spec) << "\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflow: responsive layout solver"};
  app.set_version_flag("--version", std::string(REFLOW_VERSION));
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);
  Common c;
  app.add_option("--backend", c.backend, "local | external | oracle")
      ->check(CLI::IsMember({"local", "external", "oracle"}));
  app.add_option("--solver-exe", c.solver_exe, "SMT-LIB2 executable (REFLOW_SOLVER overrides the PATH lookup)");
  app.add_option("--seed", c.seed);
  app.add_option("--stride", c.stride, "preview stride")->check(CLI::PositiveNumber);
  app.add_option("--budget-ms", c.budget_ms, "local-search budget per solve");
  app.add_option("--audit-dir", c.audit_dir, "dump hardened formulas and tables here");

  std::string spec_path, bundle_path, out, dump, csv;
  std::int64_t width = 0, step = 1;
  std::optional<std::int64_t> from, to;
  int reps = 10, port = 8765;
  bool monolithic = false;

  auto* compile = app.add_subcommand("compile", "compile a layout spec and print counts");
  compile->add_option("spec", spec_path)->required();
  compile->add_option("--dump", dump, "write the canonical formula here");

  auto* build = app.add_subcommand("build", "compile, extract, harden, preview and write a bundle");
  build->add_option("spec", spec_path)->required();
  build->add_option("-o,--output", out)->required();
  build->add_flag("--monolithic", monolithic, "skip independent-widget extraction");

  auto* solve = app.add_subcommand("solve", "solve a bundle at one width");
  solve->add_option("bundle", bundle_path)->required();
  solve->add_option("width", width)->required();

  auto* sweep = app.add_subcommand("sweep", "time incremental updates over a width range");
  sweep->add_option("bundle", bundle_path)->required();
  sweep->add_option("--from", from);
  sweep->add_option("--to", to);
  sweep->add_option("--step", step)->check(CLI::PositiveNumber);
  sweep->add_option("--reps", reps)->check(CLI::PositiveNumber);
  sweep->add_option("--spec", spec_path, "check every step against the compiled spec");
  sweep->add_option("--csv", csv, "per-step stats table");

  auto* serve = app.add_subcommand("serve", "serve a bundle over HTTP");
  serve->add_option("bundle", bundle_path)->required();
  serve->add_option("--port", port);

  auto* generate = app.add_subcommand("generate", "write the synthetic 101-widget benchmark spec");
  generate->add_option("-o,--output", out)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*compile) return cmd_compile(spec_path, dump);
    if (*build) return cmd_build(c, spec_path, out, monolithic);
    if (*solve) return cmd_solve(c, bundle_path, width);
    if (*sweep) return cmd_sweep(c, bundle_path, from, to, step, reps, spec_path, csv);
    if (*serve) return cmd_serve(c, bundle_path, port);
    if (*generate) return cmd_generate(out);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return other;
  }
  return other;
}
