#include <doctest.h>

#include <functional>
#include <random>

#include "../support/random_formula.hpp"
#include "reflow/simplify.hpp"
#include "reflow/solvers.hpp"
#include "reflow/text.hpp"

using namespace reflow;

namespace {

struct Fixture {
  Formula f;
  ArithId x, y;
  BoolId b, c;
  Fixture() {
    x = f.vars.add_arith({"x", 0, 20});
    y = f.vars.add_arith({"y", 0, 20});
    b = f.vars.add_bool({"b"});
    c = f.vars.add_bool({"c"});
  }
  Model model(std::int64_t xv, std::int64_t yv, bool bv, bool cv) const {
    Model m(2, 2);
    m.set(x, xv);
    m.set(y, yv);
    m.set(b, bv);
    m.set(c, cv);
    return m;
  }
};

Clause clause(const std::vector<LitOrConst>& lits) { return *make_clause(lits, "t"); }

}  // namespace

TEST_CASE("eval_clause boundary and arithmetic") {
  Fixture t;
  CHECK(eval_clause(clause({le(t.x, 5)}), t.model(5, 0, false, false)));
  CHECK_FALSE(eval_clause(clause({lit(t.b, false), eq(t.x, 0)}), t.model(3, 0, true, false)));
  CHECK(eval_clause(clause({le(LinearExpr(t.x) * 2 + LinearExpr(t.y) * 3, 12)}), t.model(3, 2, false, false)));
  CHECK_FALSE(eval_clause(clause({le(LinearExpr(t.x) * 2 + LinearExpr(t.y) * 3, 12)}), t.model(3, 3, false, false)));
}

TEST_CASE("eval_clause names the unassigned variable") {
  Fixture t;
  Model m(2, 2);
  try {
    (void)eval_clause(clause({le(t.y, 5)}), m, &t.f.vars);
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(e.variable() == "y");
  }
}

TEST_CASE("atoms are canonical") {
  Fixture t;
  auto half = le(LinearExpr(t.x) * Rational(1, 2), 3);
  auto six = le(t.x, 6);
  CHECK(std::get<Literal>(half) == std::get<Literal>(six));
  // strict over integers
  CHECK(std::get<Literal>(lt(t.x, 4)) == std::get<Literal>(le(t.x, 3)));
  // x ≥ 2 and ¬(x ≤ 1) agree everywhere
  for (std::int64_t v = -3; v <= 3; ++v) {
    Model m = t.model(v, 0, false, false);
    CHECK(std::get<Literal>(ge(t.x, 2)).evaluate(m) == (~std::get<Literal>(le(t.x, 1))).evaluate(m));
  }
  // 2x = 3 has no integer solution
  CHECK(std::get<bool>(eq(LinearExpr(t.x) * 2, 3)) == false);
  CHECK(std::get<bool>(le(LinearExpr(t.x) - t.x, 0)) == true);
}

TEST_CASE("double negation is identity") {
  Fixture t;
  Literal l = std::get<Literal>(le(LinearExpr(t.x) + t.y, 7));
  CHECK(~~l == l);
  Literal bl = Literal::boolean(t.b);
  CHECK(~~bl == bl);
}

TEST_CASE("atom evaluation is invariant under positive scaling") {
  Fixture t;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(-9, 9);
  for (int i = 0; i < 200; ++i) {
    Rational a = d(rng), b = d(rng), k = d(rng);
    Rational s(std::abs(d(rng)) + 1, std::abs(d(rng)) + 1);
    LinearExpr e1 = LinearExpr(t.x) * a + LinearExpr(t.y) * b;
    LinearExpr e2 = e1 * s;
    Model m = t.model(d(rng), d(rng), false, false);
    for (Cmp cmp : {Cmp::le, Cmp::lt, Cmp::eq, Cmp::ge, Cmp::gt}) {
      auto l1 = compare(e1, cmp, LinearExpr(k));
      auto l2 = compare(e2, cmp, LinearExpr(k * s));
      auto eval = [&](const LitOrConst& l) {
        return std::holds_alternative<bool>(l) ? std::get<bool>(l) : std::get<Literal>(l).evaluate(m);
      };
      CHECK(eval(l1) == eval(l2));
    }
  }
}

TEST_CASE("make_clause folds constants and tautologies") {
  Fixture t;
  CHECK_FALSE(make_clause({lit(t.b), lit(t.b, false)}, "t").has_value());
  CHECK_FALSE(make_clause({true, lit(t.b)}, "t").has_value());
  auto c = make_clause({false, lit(t.b), lit(t.b)}, "t");
  REQUIRE(c);
  CHECK(c->is_unit());
  CHECK_THROWS_AS(make_clause({false}, "t"), SpecError);
}

TEST_CASE("registry rejects duplicates and inverted bounds") {
  VarRegistry r;
  r.add_arith({"x", 0, 1});
  CHECK_THROWS_AS(r.add_arith({"x"}), SpecError);
  CHECK_THROWS_AS(r.add_arith({"y", 3, 2}), SpecError);
}

TEST_CASE("boolean_simplify chains unit propagation") {
  Fixture t;
  t.f.add_unit(lit(t.b), "u");
  t.f.add({lit(t.b, false), lit(t.c)}, "chain");
  auto r = boolean_simplify(t.f, {});
  CHECK(r.values[t.b.index] == true);
  CHECK(r.values[t.c.index] == true);
  CHECK(r.residual.hard.empty());
}

TEST_CASE("boolean_simplify keeps arithmetic and reports conflicts") {
  Fixture t;
  t.f.add({lit(t.b, false), le(t.x, 3)}, "guard");
  t.f.add({lit(t.c), eq(t.y, 2)}, "other");
  auto r = boolean_simplify(t.f, {{t.b, true}, {t.c, false}});
  REQUIRE(r.residual.hard.size() == 2);
  for (const auto& cl : r.residual.hard) {
    CHECK(cl.is_unit());
    CHECK_FALSE(cl.literals[0].is_bool());
  }
  Fixture u;
  u.f.add_unit(lit(u.b, false), "row:toolbar");
  try {
    boolean_simplify(u.f, {{u.b, true}});
    FAIL("expected conflict");
  } catch (const ConflictError& e) {
    REQUIRE(e.origins().size() == 1);
    CHECK(e.origins()[0] == "row:toolbar");
  }
}

TEST_CASE("collect_unit_equations takes positive unit equalities only") {
  Fixture t;
  t.f.add_unit(eq(t.x, 3), "a");
  t.f.add_unit(le(t.x, 9), "b");
  t.f.add({eq(t.y, t.x), lit(t.b)}, "c");
  t.f.add_unit(ne(t.y, 4), "d");
  auto eqs = collect_unit_equations(t.f);
  REQUIRE(eqs.size() == 1);
  CHECK(eqs[0].terms().size() == 1);
  CHECK(eqs[0].constant() == 3);
}

namespace {

/// All Boolean assignments × boxed arithmetic assignments, checked exhaustively.
template <class Fn>
void for_each_model(const Formula& f, Fn fn) {
  const std::size_t nb = f.vars.bool_count();
  const std::size_t na = f.vars.arith_count();
  Model m(na, nb);
  std::function<void(std::size_t)> arith = [&](std::size_t i) {
    if (i == na) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nb); ++mask) {
        for (std::uint32_t j = 0; j < nb; ++j) m.set(BoolId{j}, (mask >> j) & 1);
        fn(m);
      }
      return;
    }
    const auto& v = f.vars.arith(ArithId{static_cast<std::uint32_t>(i)});
    for (std::int64_t x = *v.lower; x <= *v.upper; ++x) {
      m.set(ArithId{static_cast<std::uint32_t>(i)}, x);
      arith(i + 1);
    }
  };
  arith(0);
}

}  // namespace

TEST_CASE("boolean_simplify is model preserving and idempotent") {
  std::mt19937_64 rng(11);
  testing::RandomShape shape{.arith = 2, .bools = 6, .softs = 0, .clauses = 9, .max_width = 3, .bound = 4};
  int checked = 0;
  for (int round = 0; round < 120; ++round) {
    Formula f = testing::random_formula(rng, shape);
    BoolAssignment fixed;
    if (round % 2) fixed[BoolId{0}] = round % 4 == 1;
    SimplifyResult r;
    try {
      r = boolean_simplify(f, fixed, false);
    } catch (const ConflictError&) {
      // a conflict must mean no model consistent with `fixed` exists
      for_each_model(f, [&](const Model& m) {
        bool consistent = true;
        for (auto [b, v] : fixed) consistent &= *m.get(b) == v;
        if (consistent) CHECK_FALSE(satisfies(f, {}, m));
      });
      continue;
    }
    for_each_model(f, [&](const Model& m) {
      bool consistent = true;
      for (auto [b, v] : fixed) consistent &= *m.get(b) == v;
      if (!consistent) return;
      bool inferred_ok = true;
      for (std::uint32_t i = 0; i < r.values.size(); ++i) {
        if (r.values[i]) inferred_ok &= *m.get(BoolId{i}) == *r.values[i];
      }
      bool original = satisfies(f, {}, m);
      bool residual = inferred_ok && satisfies(r.residual, {}, m);
      CHECK(original == residual);
    });
    auto again = boolean_simplify(r.residual, r.inferred(), false);
    CHECK(dump_formula(again.residual) == dump_formula(r.residual));
    CHECK(again.values == r.values);
    ++checked;
  }
  CHECK(checked > 40);
}

TEST_CASE("formula text round trip") {
  Fixture t;
  t.f.add({lit(t.b, false), le(LinearExpr(t.x) * 2 - t.y, 3)}, "row:toolbar");
  t.f.add_unit(eq(t.y, 4), "user:u1");
  t.f.soft.push_back({t.c, false, 3});
  std::string text = dump_formula(t.f);
  Formula back = parse_formula(text);
  CHECK(dump_formula(back) == text);
  CHECK(back.hard == t.f.hard);
  CHECK(back.soft == t.f.soft);
}
