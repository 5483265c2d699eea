#include <doctest.h>

#include <algorithm>

#include "../support/fixtures.hpp"

using namespace reflow;
using namespace reflow::testing;

namespace {

bool has(const std::vector<std::string>& xs, const std::string& x) { return std::find(xs.begin(), xs.end(), x) != xs.end(); }

}  // namespace

TEST_CASE("a discontinuous assignment is excluded and the table re-hardened") {
  Formula f;
  ArithId p = f.vars.add_arith({"p", 0, 100});
  BoolId big = f.vars.add_bool({"big"});
  f.add({lit(big, false), ge(p, 60)}, "c1");
  f.add({lit(big, false), le(p, 64), ge(p, 75)}, "c2");
  f.soft.push_back({big, true, 3});
  OracleBackend oracle;
  IntervalTable t = soft_constraints_hardening(f, p, oracle);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].lo == 60);

  PreviewResult r = preview_sweep(f, p, t, oracle);
  CHECK(r.status == PreviewStatus::repaired);
  REQUIRE(r.repair_log.size() == 1);
  CHECK(r.repair_log[0].at == 74);
  CHECK(r.repair_log[0].assignment == BoolAssignment{{big, true}});
  REQUIRE(r.table.tiles());
  REQUIRE(r.table.rows.size() == 2);
  CHECK(r.table.rows[0] == IntervalRow{75, 100, {{big, true}}, 3});
  CHECK(r.table.rows[1] == IntervalRow{0, 74, {{big, false}}, 0});
  REQUIRE_FALSE(r.repairs.empty());

  // the repaired relation is satisfiable at every width
  Formula g = f;
  g.hard.insert(g.hard.end(), r.repairs.begin(), r.repairs.end());
  auto rel = r.table.relation(g.vars);
  for (std::int64_t v = 0; v <= 100; ++v) {
    SolverRequest req;
    req.formula = &g;
    req.extra = rel;
    req.extra.push_back(*make_clause({eq(p, v)}, "probe"));
    CHECK(oracle.solve(req).status == Status::sat);
  }

  // a strided sweep still finds the first failing width
  PreviewOptions coarse;
  coarse.stride = 7;
  PreviewResult s = preview_sweep(f, p, t, oracle, coarse);
  REQUIRE(s.repair_log.size() == 1);
  CHECK(s.repair_log[0].at == 74);
  CHECK(s.table == r.table);
}

TEST_CASE("a clean table passes unchanged") {
  Formula f;
  ArithId p = f.vars.add_arith({"p", 0, 50});
  BoolId big = f.vars.add_bool({"big"});
  f.add({lit(big, false), ge(p, 20)}, "c1");
  f.soft.push_back({big, true, 1});
  OracleBackend oracle;
  IntervalTable t = soft_constraints_hardening(f, p, oracle);
  PreviewResult r = preview_sweep(f, p, t, oracle);
  CHECK(r.status == PreviewStatus::clean);
  CHECK(r.table == t);
  CHECK(r.repairs.empty());
  CHECK(r.checks == 51);
}

TEST_CASE("the gap fixture is repaired") {
  const BuildReport& r = built("gap");
  CHECK(r.status == PreviewStatus::repaired);
  REQUIRE(r.bundle);
  const auto& rows = r.bundle->table.rows;
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].lo == 1600);
  CHECK(rows[0].hi == 2000);
  CHECK(rows[1].lo == 1000);
  CHECK(rows[1].hi == 1599);
  const BoolId rich = r.bundle->vars.bool_by_name("rich.v");
  CHECK(rows[0].assignment.at(rich));
  CHECK_FALSE(rows[1].assignment.at(rich));
  bool logged = false;
  for (const auto& s : r.sweeps) {
    for (const auto& rec : s.result.repair_log) logged = logged || (s.formula == "outer" && rec.at == 1599);
  }
  CHECK(logged);
}

TEST_CASE("storefront previews clean") {
  const BuildReport& r = built("storefront");
  CHECK(r.status == PreviewStatus::clean);
  for (const auto& s : r.sweeps) CHECK(s.result.repairs.empty());
}

TEST_CASE("conflicting constraints are reported with a genuine core") {
  const BuildReport& r = built("conflict");
  REQUIRE(r.status == PreviewStatus::conflict);
  CHECK_FALSE(r.bundle);
  REQUIRE(r.conflict);
  const auto& core = r.conflict->core;
  CHECK(has(core, "user:box_50"));
  CHECK(has(core, "user:box_60"));
  bool user = false;
  for (const auto& g : r.conflict->groups) user = user || (g.kind == "user" && (g.widget == "box_50" || g.widget == "box_60"));
  CHECK(user);
  CHECK(r.conflict->text.find("box_50") != std::string::npos);

  // the core alone is unsatisfiable at the reported width
  CompiledLayout L = compile_layout(fixture("conflict"));
  Formula g;
  g.vars = L.formula.vars;
  for (const auto& c : L.formula.hard) {
    if (has(core, c.origin)) g.hard.push_back(c);
  }
  g.add_unit(eq(L.screen_width, r.conflict->at), "probe");
  OracleBackend oracle;
  SolverRequest req;
  req.formula = &g;
  CHECK(oracle.solve(req).status == Status::unsat);
}

TEST_CASE("conflict grouping") {
  CompiledLayout L = compile_layout(fixture("conflict"));
  CHECK_THROWS_AS(group_conflicts({}, L.formula), Error);
  auto groups = group_conflicts({"user:box_50", "column:screen", "screen"}, L.formula);
  REQUIRE(groups.size() == 3);
  auto kind_of = [&](const std::string& origin) {
    for (const auto& g : groups) {
      if (g.origin == origin) return g.kind;
    }
    return std::string("?");
  };
  CHECK(kind_of("user:box_50") == "user");
  CHECK(kind_of("column:screen") == "column");
  CHECK(report_conflicts({"user:box_50"}, L.formula).find("box_50") != std::string::npos);
}
