#include <doctest.h>

#include <random>

#include "../support/random_formula.hpp"
#include "reflow/smtlib.hpp"
#include "reflow/solvers.hpp"

using namespace reflow;

namespace {

SolverRequest request(const Formula& f) {
  SolverRequest r;
  r.formula = &f;
  return r;
}

bool have_external() { return ExternalBackend::available(); }

}  // namespace

TEST_CASE("oracle optimizes a bounded variable") {
  Formula f;
  auto x = f.vars.add_arith({"x"});
  f.add_unit(ge(x, 2), "lo");
  f.add_unit(le(x, 7), "hi");
  OracleBackend oracle;
  auto req = request(f);
  req.objective = Objective{x, Direction::maximize};
  auto r = oracle.solve(req);
  REQUIRE(r.status == Status::sat);
  CHECK(*r.optimum == 7);
  CHECK_FALSE(r.capped);
  req.objective->direction = Direction::minimize;
  CHECK(*oracle.solve(req).optimum == 2);
}

TEST_CASE("oracle core names both conflicting origins") {
  Formula f;
  auto x = f.vars.add_arith({"x"});
  f.add_unit(le(x, 1), "user:a");
  f.add_unit(ge(x, 2), "user:b");
  f.add_unit(ge(x, -5), "user:c");
  OracleBackend oracle;
  auto req = request(f);
  req.want_core = true;
  auto r = oracle.solve(req);
  REQUIRE(r.status == Status::unsat);
  std::sort(r.core.begin(), r.core.end());
  CHECK(r.core == std::vector<std::string>{"user:a", "user:b"});
}

TEST_CASE("oracle handles disequality and integrality") {
  Formula f;
  auto x = f.vars.add_arith({"x", 0, 3});
  auto y = f.vars.add_arith({"y", 0, 3});
  // 2x + 2y = 5 folds to false on construction
  CHECK_THROWS_AS(f.add_unit(eq(LinearExpr(x) * 2 + LinearExpr(y) * 2, 5), "odd"), SpecError);
  f.add_unit(eq(LinearExpr(x) * 2 + LinearExpr(y) * 4, 6), "even");
  f.add_unit(ne(x, 1), "x-not-1");
  f.add_unit(ne(x, 3), "x-not-3");
  OracleBackend oracle;
  CHECK(oracle.solve(request(f)).status == Status::unsat);

  Formula g;
  auto a = g.vars.add_arith({"a", 0, 2});
  g.add_unit(ne(a, 0), "n0");
  g.add_unit(ne(a, 1), "n1");
  auto r2 = oracle.solve(request(g));
  REQUIRE(r2.status == Status::sat);
  CHECK(*r2.model->get(a) == 2);
  g.add_unit(ne(a, 2), "n2");
  CHECK(oracle.solve(request(g)).status == Status::unsat);
}

TEST_CASE("oracle refuses oversize maxsmt") {
  Formula f;
  for (int i = 0; i < 21; ++i) {
    auto b = f.vars.add_bool({"s" + std::to_string(i)});
    f.soft.push_back({b, true, 1});
  }
  OracleBackend oracle;
  auto req = request(f);
  req.maxsmt = true;
  CHECK_THROWS_AS(oracle.solve(req), LimitError);
}

TEST_CASE("oracle maxsmt respects exclusivity") {
  Formula f;
  auto a = f.vars.add_bool({"a"});
  auto b = f.vars.add_bool({"b"});
  auto c = f.vars.add_bool({"c"});
  auto x = f.vars.add_arith({"x", 0, 10});
  f.add({lit(a, false), lit(b, false)}, "amo");
  f.add({lit(c, false), ge(x, 8)}, "c-needs");
  f.add({lit(a, false), le(x, 5)}, "a-needs");
  f.soft = {{a, true, 4}, {b, true, 3}, {c, true, 2}};
  OracleBackend oracle;
  auto req = request(f);
  req.maxsmt = true;
  auto r = oracle.solve(req);
  REQUIRE(r.status == Status::sat);
  CHECK(*r.soft_weight == 5);  // b + c (a forbids c through x)
}

TEST_CASE("emit_smtlib scales rationals and names origins") {
  Formula f;
  auto x = f.vars.add_arith({"x"});
  f.add_unit(le(LinearExpr(x) * Rational(1, 2), 3), "row:toolbar");
  auto req = request(f);
  std::string text = emit_smtlib(req);
  CHECK(text.find("(<= |x| 6)") != std::string::npos);
  CHECK(text.find(":named |row:toolbar#0|") != std::string::npos);
  CHECK(text.find("QF_LIA") != std::string::npos);
  CHECK(emit_smtlib(req) == text);
  CHECK(origin_of_assertion("row:toolbar#0") == "row:toolbar");
}

TEST_CASE("optimum is tight under the oracle") {
  std::mt19937_64 rng(3);
  testing::RandomShape shape{.arith = 3, .bools = 2, .softs = 0, .clauses = 5, .max_width = 2, .bound = 10};
  OracleBackend oracle;
  int checked = 0;
  for (int i = 0; i < 40; ++i) {
    Formula f = testing::random_formula(rng, shape);
    auto req = request(f);
    req.objective = Objective{ArithId{0}, i % 2 ? Direction::maximize : Direction::minimize};
    auto r = oracle.solve(req);
    if (r.status != Status::sat) continue;
    ++checked;
    CHECK(satisfies(f, {}, *r.model));
    CHECK(*r.model->get(ArithId{0}) == *r.optimum);
    // one step beyond the optimum is infeasible
    auto beyond = make_clause({req.objective->direction == Direction::maximize ? ge(ArithId{0}, *r.optimum + 1)
                                                                              : le(ArithId{0}, *r.optimum - 1)},
                              "probe");
    if (!beyond) continue;
    auto chk = request(f);
    chk.extra = {*beyond};
    CHECK(oracle.solve(chk).status == Status::unsat);
  }
  CHECK(checked > 10);
}

TEST_CASE("external backend agrees with the oracle" * doctest::skip(!have_external())) {
  std::mt19937_64 rng(5);
  testing::RandomShape shape{.arith = 3, .bools = 3, .softs = 3, .clauses = 7, .max_width = 3, .bound = 8};
  OracleBackend oracle;
  ExternalBackend external;
  for (int i = 0; i < 30; ++i) {
    Formula f = testing::random_formula(rng, shape);
    auto req = request(f);
    req.want_core = true;
    auto a = oracle.solve(req);
    auto b = external.solve(req);
    REQUIRE(b.status != Status::unknown);
    CHECK(a.status == b.status);
    if (b.status == Status::sat) CHECK(satisfies(f, {}, *b.model));
    if (b.status == Status::unsat) {
      // the core re-checks unsat
      Formula core = f;
      core.hard.clear();
      for (const auto& c : f.hard) {
        if (std::find(b.core.begin(), b.core.end(), c.origin) != b.core.end()) core.hard.push_back(c);
      }
      CHECK(oracle.solve(request(core)).status == Status::unsat);
    }
    req.want_core = false;
    req.maxsmt = true;
    auto ma = oracle.solve(req);
    auto mb = external.solve(req);
    CHECK(ma.status == mb.status);
    if (ma.status == Status::sat) {
      CHECK(*ma.soft_weight == *mb.soft_weight);
      CHECK(satisfies(f, {}, *mb.model));
    }
  }
}

TEST_CASE("external backend reports missing executable" ) {
  ExternalConfig cfg;
  cfg.executable = "/nonexistent/solver";
  ExternalBackend external(cfg);
  Formula f;
  auto x = f.vars.add_arith({"x"});
  f.add_unit(le(x, 1), "a");
  auto r = external.solve(request(f));
  CHECK(r.status == Status::unknown);
  CHECK_FALSE(r.diagnostic.empty());
}
