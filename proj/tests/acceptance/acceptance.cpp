// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "../support/fixtures.hpp"
#include "../support/random_formula.hpp"
#include "reflow/bench.hpp"
#include "reflow/runtime.hpp"

using namespace reflow;
using namespace reflow::testing;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

/// LSU driver over the oracle's satisfiability check.
class LsuOverOracle final : public CheckingBackend {
 public:
  SolverResult check(const Formula& f, const std::vector<Clause>& extra, const std::vector<Literal>& assumptions,
                     bool want_core) override {
    return oracle_.check(f, extra, assumptions, want_core);
  }
  std::string name() const override { return "lsu+oracle"; }

 private:
  OracleBackend oracle_;
};

const DeployBundle& bundle_of_bench() {
  static const BuildReport report = build_pipeline(benchmark_spec());
  if (!report.bundle) throw Error("benchmark did not build");
  return *report.bundle;
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

const char* kSoundness[] = {"storefront",      "storefront_split",  "row_column", "flow_wrap", "flow_nowrap", "flow_varying",
                            "waterfall", "table", "card",       "flex",      "gap"};

std::size_t violations(const Formula& compiled, const RuntimeSession& s, const Geometry& g) {
  return violated_clauses(compiled, geometry_model(s.bundle(), g, s.model())).size();
}

Verdict hard_soundness() {
  const auto t0 = Clock::now();
  std::size_t widths = 0, bad = 0, fixtures = 0;
  std::string first_bad;
  for (const char* name : kSoundness) {
    const BuildReport& r = built(name);
    if (!r.bundle) {
      bad++;
      first_bad = std::string(name) + " did not build";
      continue;
    }
    ++fixtures;
    const Formula compiled = compile_layout(fixture(name)).formula;
    RuntimeSession s(*r.bundle);
    const std::int64_t stride = s.max_width() - s.min_width() <= 2000 ? 1 : 7;
    for (std::int64_t w = s.max_width(); w >= s.min_width(); w -= stride) {
      ++widths;
      std::size_t v = 0;
      try {
        v = violations(compiled, s, s.incremental_update(w));
      } catch (const Error& e) {
        v = 1;
      }
      if (v && first_bad.empty()) first_bad = std::string(name) + " @ " + std::to_string(w);
      bad += v != 0;
    }
  }
  const double secs = ms_since(t0) / 1000;
  std::ostringstream d;
  d << fixtures << " fixtures, " << widths << " widths, " << bad << " violating, " << secs << " s";
  if (!first_bad.empty()) d << " (first: " << first_bad << ")";
  return {fixtures >= 10 && bad == 0 && secs < 300, d.str()};
}

Verdict maxsmt_optimality() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_softs(1, 10), n_arith(1, 12), n_clauses(3, 14);
  LsuOverOracle lsu;
  OracleBackend brute;
  std::unique_ptr<Backend> external;
  if (ExternalBackend::available()) external = make_backend("external");
  int same = 0, sat = 0, external_same = 0;
  for (int i = 0; i < 200; ++i) {
    RandomShape shape;
    shape.softs = n_softs(rng);
    shape.bools = shape.softs + 2;
    shape.arith = n_arith(rng);
    shape.clauses = n_clauses(rng);
    Formula f = random_formula(rng, shape);
    SolverRequest req;
    req.formula = &f;
    req.maxsmt = true;
    SolverResult a = lsu.solve(req), b = brute.solve(req);
    bool agree = a.status == b.status && a.soft_weight == b.soft_weight;
    if (agree && a.status == Status::sat) agree = satisfies(f, {}, *a.model) && soft_weight(f.soft, *a.model) == *a.soft_weight;
    same += agree;
    sat += b.status == Status::sat;
    if (external) {
      SolverResult c = external->solve(req);
      external_same += c.status == b.status && c.soft_weight == b.soft_weight;
    }
  }
  std::ostringstream d;
  d << same << "/200 match brute force (" << sat << " satisfiable)";
  if (external) d << ", external LSU " << external_same << "/200";
  return {same == 200 && (!external || external_same == 200), d.str()};
}

Verdict interval_tables() {
  std::ostringstream d;
  bool ok = true;
  const auto& table = bundle_of("storefront").table;
  const auto& vars = bundle_of("storefront").vars;
  auto row_is = [&](std::size_t i, std::int64_t lo, std::int64_t hi, std::vector<std::string> on) {
    if (i >= table.rows.size()) return false;
    const auto& row = table.rows[i];
    std::vector<std::string> shown;
    for (const auto& [b, v] : row.assignment) {
      if (v) shown.push_back(vars.boolean(b).name);
    }
    std::sort(shown.begin(), shown.end());
    std::sort(on.begin(), on.end());
    return row.lo == lo && row.hi == hi && shown == on;
  };
  const bool storefront = table.rows.size() == 2 && row_is(0, 1500, 2000, {"wide_bar.v", "3_col_table.v"}) &&
                    row_is(1, 1000, 1499, {"thin_bar.v", "2_col_table.v"});
  ok = ok && storefront;
  d << "storefront rows " << (storefront ? "match" : "differ");

  std::mt19937_64 rng(77);
  RandomShape shape;
  shape.arith = 3;
  shape.bools = 5;
  shape.softs = 4;
  shape.clauses = 7;
  auto backend = ExternalBackend::available() ? make_backend("external") : make_backend("oracle");
  OracleBackend oracle;
  int instances = 0, samples = 0, mismatches = 0, gaps = 0;
  while (instances < 50) {
    Formula f = random_formula(rng, shape);
    const ArithId p{0};
    IntervalTable t;
    try {
      t = soft_constraints_hardening(f, p, *backend, {.related = f.soft, .extra = {}});
    } catch (const ConflictError&) {
      continue;  // no range to tabulate
    }
    ++instances;
    if (!t.tiles()) {
      ++mismatches;
      continue;
    }
    for (std::int64_t v = t.min_val; v <= t.max_val; ++v) {
      SolverRequest req;
      req.formula = &f;
      req.maxsmt = true;
      req.extra = {*make_clause({eq(p, v)}, "probe")};
      SolverResult r = oracle.solve(req);
      if (r.status == Status::unsat) {
        ++gaps;  // no layout at v at all; preview repairs these
        continue;
      }
      ++samples;
      mismatches += r.status != Status::sat || *r.soft_weight != t.rows[*t.row_of(v)].weight;
    }
  }
  ok = ok && mismatches == 0;
  d << "; " << instances << " random tables, " << samples << " widths, " << mismatches << " mismatches (" << gaps
    << " infeasible widths skipped)";
  return {ok, d.str()};
}

Verdict unit_elimination() {
  std::ostringstream d;
  // (a) random formulas against the oracle
  std::mt19937_64 rng(5);
  RandomShape shape{.arith = 5, .bools = 2, .softs = 0, .clauses = 7, .max_width = 2, .bound = 8, .eq_percent = 55};
  OracleBackend oracle;
  auto model_of = [&](const Formula& f) -> std::optional<Model> {
    SolverRequest req;
    req.formula = &f;
    SolverResult r = oracle.solve(req);
    return r.status == Status::sat ? r.model : std::nullopt;
  };
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    Formula f = random_formula(rng, shape);
    auto original = model_of(f);
    try {
      ReducedFormula r = unit_equation_elimination(f);
      auto reduced = model_of(r.formula);
      bool ok = original.has_value() == reduced.has_value();
      if (ok && reduced) {
        Model m = *reduced;
        r.map.extend(m);
        ok = satisfies(f, {}, m);
      }
      agree += ok;
    } catch (const ConflictError&) {
      agree += !original.has_value();
    }
  }
  const bool a = agree == 100;
  d << "(a) " << agree << "/100";

  // (b) z = 0 cascade
  Formula f;
  auto x = f.vars.add_arith({"x"});
  auto y = f.vars.add_arith({"y"});
  auto z = f.vars.add_arith({"z"});
  auto p = f.vars.add_arith({"a"});
  auto q = f.vars.add_arith({"b"});
  f.add_unit(eq(z, 0), "e1");
  f.add({eq(LinearExpr(x) + y, 0), gt(z, 0)}, "e2");
  f.add_unit(ge(LinearExpr(p) + q + z, 0), "e3");
  f.add_unit(le(LinearExpr(p) + q, 0), "e4");
  ReducedFormula r = unit_equation_elimination(f);
  const bool b = r.trace.size() == 2 && r.trace[0].eliminated == std::vector<ArithId>{z} &&
                 r.trace[0].new_unit_equations.size() == 2 && r.trace[1].eliminated == std::vector<ArithId>{x, p} &&
                 r.formula.hard.empty();
  d << ", (b) " << (b ? "two rounds: z, then x and a" : "trace differs");

  // (c) benchmark: share of clauses left after Boolean reasoning that elimination removes
  CompiledLayout L = compile_layout(benchmark_spec());
  const DeployBundle& bench = bundle_of_bench();
  double worst = 1;
  for (const auto& row : bench.table.rows) {
    ParametricSolver s(L.formula, row.assignment, {L.screen_width});
    const double after = static_cast<double>(s.clauses_after_simplify());
    const double kept = static_cast<double>(s.reduced().formula.hard.size());
    worst = std::min(worst, after > 0 ? 1 - kept / after : 1.0);
  }
  const bool c = worst >= 0.5;
  d << ", (c) " << static_cast<int>(worst * 1000) / 10.0 << "% eliminated in the worst row";
  return {a && b && c, d.str()};
}

Verdict gap_repair() {
  const BuildReport& r = built("gap");
  if (!r.bundle) return {false, "gap fixture did not build"};
  const auto& rows = r.bundle->table.rows;
  const bool row = !rows.empty() && rows[0].lo == 1600 && rows[0].hi == 2000;
  const Formula compiled = compile_layout(fixture("gap")).formula;
  RuntimeSession s(*r.bundle);
  std::size_t bad = 0, widths = 0;
  for (std::int64_t w = s.max_width(); w >= s.min_width(); --w, ++widths) {
    try {
      bad += violations(compiled, s, s.incremental_update(w)) != 0;
    } catch (const Error&) {
      ++bad;
    }
  }
  std::ostringstream d;
  d << "status " << preview_status_name(r.status) << ", top row [" << (rows.empty() ? 0 : rows[0].lo) << ", "
    << (rows.empty() ? 0 : rows[0].hi) << "], " << widths - bad << "/" << widths << " widths satisfied";
  return {row && bad == 0 && r.status == PreviewStatus::repaired, d.str()};
}

struct SweepNumbers {
  double avg_ms = 0, max_ms = 0;
  std::size_t steps = 0, boundary = 0, reused = 0, fallbacks = 0;
  std::vector<std::uint64_t> within_steps;
};

SweepNumbers sweep_benchmark() {
  SweepNumbers n;
  RuntimeSession s(bundle_of_bench());
  std::optional<std::size_t> prev_row;
  double total = 0;
  for (std::int64_t w = s.max_width(); w >= s.min_width(); --w) {
    SolveStats st;
    const auto t0 = Clock::now();
    s.incremental_update(w, &st);
    const double ms = ms_since(t0);
    total += ms;
    n.max_ms = std::max(n.max_ms, ms);
    ++n.steps;
    n.fallbacks += st.fallback;
    const bool boundary = !prev_row || *prev_row != st.row;
    prev_row = st.row;
    if (boundary) {
      ++n.boundary;
      continue;
    }
    n.reused += st.reasoning_reused;
    n.within_steps.push_back(st.steps);
  }
  n.avg_ms = total / static_cast<double>(n.steps);
  return n;
}

Verdict latency(const SweepNumbers& n) {
  const std::size_t inner = n.steps - n.boundary;
  std::ostringstream d;
  d << n.steps << " steps, avg " << n.avg_ms << " ms, max " << n.max_ms << " ms, reasoning reused on " << n.reused << "/"
    << inner << " non-boundary steps, " << n.fallbacks << " fallbacks";
  return {n.avg_ms <= 25 && n.reused == inner, d.str()};
}

Verdict warm_start(const SweepNumbers& n) {
  if (n.within_steps.empty()) return {false, "no within-interval updates"};
  auto v = n.within_steps;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  const auto median = v[v.size() / 2];
  std::ostringstream d;
  d << "median " << median << " local-search steps over " << v.size() << " within-interval updates, max "
    << *std::max_element(n.within_steps.begin(), n.within_steps.end());
  return {median <= 100, d.str()};
}

Verdict extraction_equivalence() {
  std::ostringstream d;
  int fixtures = 0, bad = 0, samples = 0;
  for (const char* name : kSoundness) {
    const BuildReport& r = built(name);
    if (!r.bundle || r.bundle->slices.size() < 2) continue;
    const BuildReport& mono = built(name, false);
    if (!mono.bundle) {
      ++bad;
      continue;
    }
    ++fixtures;
    const Formula compiled = compile_layout(fixture(name)).formula;
    RuntimeSession two(*r.bundle), one(*mono.bundle);
    const std::int64_t lo = two.min_width(), hi = two.max_width();
    for (int i = 0; i < 20; ++i) {
      const std::int64_t w = hi - (hi - lo) * i / 19;
      ++samples;
      try {
        bad += violations(compiled, two, two.solve_at_width(w)) != 0;
        bad += violations(compiled, one, one.solve_at_width(w)) != 0;
      } catch (const Error&) {
        ++bad;
      }
    }
    d << name << " (" << r.bundle->slices.size() << " slices) ";
  }
  d << "| " << fixtures << " fixtures, " << samples << " widths, " << bad << " failures";
  return {fixtures > 0 && bad == 0, d.str()};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& fn) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("criterion %d %s: %s (%s; %.1f s)\n", id, name, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                ms_since(t0) / 1000);
    std::fflush(stdout);
  };
  report(1, "hard soundness", hard_soundness);
  report(2, "maxsmt optimality", maxsmt_optimality);
  report(3, "interval tables", interval_tables);
  report(4, "unit equation elimination", unit_elimination);
  report(5, "gap repair", gap_repair);
  SweepNumbers sweep;
  bool swept = false;
  auto ensure_sweep = [&] {
    if (!swept) sweep = sweep_benchmark();
    swept = true;
  };
  report(6, "latency", [&] {
    ensure_sweep();
    return latency(sweep);
  });
  report(7, "warm start", [&] {
    ensure_sweep();
    return warm_start(sweep);
  });
  report(8, "extraction equivalence", extraction_equivalence);
  return failures == 0 ? 0 : 1;
}
