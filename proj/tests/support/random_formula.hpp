#pragma once

#include <random>
#include <string>

#include "reflow/formula.hpp"

namespace reflow::testing {

struct RandomShape {
  int arith = 4;
  int bools = 3;
  int softs = 2;  ///< softs are placed on the first `softs` Booleans
  int clauses = 6;
  int max_width = 3;  ///< literals per clause
  std::int64_t bound = 12;
  int eq_percent = 25;
};

inline LitOrConst random_atom(std::mt19937_64& rng, const std::vector<ArithId>& vars, const RandomShape& s) {
  std::uniform_int_distribution<int> nterms(1, std::min<int>(3, static_cast<int>(vars.size())));
  std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<std::int64_t> constant(-s.bound, 2 * s.bound);
  std::uniform_int_distribution<int> percent(0, 99);
  LinearExpr lhs;
  int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    int c = coef(rng);
    if (c == 0) c = 1;
    lhs += LinearExpr(vars[pick(rng)]) * Rational(c);
  }
  int p = percent(rng);
  Cmp cmp = p < s.eq_percent ? Cmp::eq : (p < 60 ? Cmp::le : (p < 80 ? Cmp::ge : (p < 90 ? Cmp::lt : Cmp::gt)));
  return compare(lhs, cmp, LinearExpr(constant(rng)));
}

/// Small bounded MaxSMT instance; every arithmetic variable has a finite box.
inline Formula random_formula(std::mt19937_64& rng, const RandomShape& s) {
  Formula f;
  std::vector<ArithId> vars;
  std::vector<BoolId> bools;
  std::uniform_int_distribution<std::int64_t> lo(-2, 3);
  for (int i = 0; i < s.arith; ++i) {
    std::int64_t l = lo(rng);
    vars.push_back(f.vars.add_arith(ArithVar{"x" + std::to_string(i), l, l + s.bound, Axis::none, VarRole::other, no_owner}));
  }
  for (int i = 0; i < s.bools; ++i) bools.push_back(f.vars.add_bool(BoolVar{"b" + std::to_string(i), no_owner}));
  std::uniform_int_distribution<int> width(1, s.max_width);
  std::uniform_int_distribution<int> coin(0, 99);
  std::uniform_int_distribution<std::size_t> pickb(0, bools.empty() ? 0 : bools.size() - 1);
  for (int c = 0; c < s.clauses; ++c) {
    std::vector<LitOrConst> lits;
    int w = width(rng);
    for (int i = 0; i < w; ++i) {
      if (!bools.empty() && (vars.empty() || coin(rng) < 40)) {
        lits.push_back(lit(bools[pickb(rng)], coin(rng) < 50));
      } else if (!vars.empty()) {
        lits.push_back(random_atom(rng, vars, s));
      }
    }
    try {
      f.add(lits, "c" + std::to_string(c));
    } catch (const SpecError&) {
      // every literal folded to false; skip the clause
    }
  }
  std::uniform_int_distribution<std::int64_t> weight(1, 9);
  for (int i = 0; i < s.softs && i < s.bools; ++i) f.soft.push_back(SoftLiteral{bools[i], coin(rng) < 70, weight(rng)});
  return f;
}

}  // namespace reflow::testing
