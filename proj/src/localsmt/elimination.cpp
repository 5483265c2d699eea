#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "reflow/localsmt.hpp"
#include "reflow/text.hpp"

namespace reflow {

void EliminationMap::extend(Model& m) const {
  for (const auto& s : subs_) {
    Rational value = s.expr.constant();
    for (const auto& [v, c] : s.expr.coefs()) {
      auto x = m.get(ArithId{v});
      if (!x) throw EvalError("x" + std::to_string(v));
      value += c * Rational(static_cast<long>(*x));
    }
    if (value.get_den() != 1) throw Error("back-substitution produced a non-integral value");
    m.set(s.var, to_int64(value.get_num()));
  }
  for (const auto& [b, value] : bools_) m.set(b, value);
}

namespace {

struct Interval {
  std::optional<Rational> lo;
  std::optional<Rational> hi;
};

std::string atom_key(const LinearAtom& a) {
  std::string k;
  for (const auto& t : a.terms()) k += t.coef.get_str() + "*" + std::to_string(t.var.index) + " ";
  k += a.relation() == Relation::le ? "<= " : "= ";
  k += a.constant().get_str();
  return k;
}

std::string literal_key(const Literal& l) {
  if (l.is_bool()) return (l.positive() ? "b" : "!b") + std::to_string(l.bool_var().index);
  return (l.positive() ? "[" : "![") + atom_key(l.atom()) + "]";
}

std::string clause_key(const Clause& c) {
  std::vector<std::string> keys;
  for (const auto& l : c.literals) keys.push_back(literal_key(l));
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const auto& k : keys) out += k + "|";
  return out;
}

/// Sign-normalized linear form of an inequality atom (first coefficient positive).
std::string form_key(const LinearAtom& a, int sign) {
  std::string k;
  for (const auto& t : a.terms()) {
    Rational c = t.coef * sign;
    k += c.get_str() + "*" + std::to_string(t.var.index) + " ";
  }
  return k;
}

}  // namespace

class Eliminator {
 public:
  Eliminator(const Formula& f, const EliminationOptions& options) : f_(f) {
    f_.soft.clear();
    protected_.assign(f.vars.arith_count(), false);
    for (auto v : options.protected_vars) protected_.at(v.index) = true;
    map_.mask_.assign(f.vars.arith_count(), false);
  }

  ReducedFormula run() {
    ReducedFormula out;
    out.clauses_before = f_.hard.size();
    std::set<std::string> units = unit_equation_keys();
    for (;;) {
      EliminationRound round;
      round.eliminated = eliminate();
      if (round.eliminated.empty()) {
        if (!simplify()) break;
        units = unit_equation_keys();
        continue;
      }
      simplify();
      std::set<std::string> now = unit_equation_keys();
      for (const auto& c : f_.hard) {
        if (c.is_unit() && !c.literals[0].is_bool() && c.literals[0].positive() &&
            c.literals[0].atom().relation() == Relation::eq && !units.count(clause_key(c))) {
          round.new_unit_equations.push_back(format_clause(c, f_.vars));
        }
      }
      units = std::move(now);
      round.clauses_after = f_.hard.size();
      out.trace.push_back(std::move(round));
    }
    out.formula = std::move(f_);
    out.map = std::move(map_);
    return out;
  }

 private:
  std::set<std::string> unit_equation_keys() const {
    std::set<std::string> keys;
    for (const auto& c : f_.hard) {
      if (c.is_unit() && !c.literals[0].is_bool() && c.literals[0].positive() &&
          c.literals[0].atom().relation() == Relation::eq) {
        keys.insert(clause_key(c));
      }
    }
    return keys;
  }

  [[noreturn]] void conflict(const std::string& what, std::vector<std::string> origins) {
    std::sort(origins.begin(), origins.end());
    origins.erase(std::unique(origins.begin(), origins.end()), origins.end());
    throw ConflictError(what, std::move(origins));
  }

  Interval range_of(const LinearAtom& a) const {
    Interval r{Rational(0), Rational(0)};
    for (const auto& t : a.terms()) {
      const auto& v = f_.vars.arith(t.var);
      const auto& low = t.coef > 0 ? v.lower : v.upper;
      const auto& high = t.coef > 0 ? v.upper : v.lower;
      if (r.lo) {
        if (low) {
          *r.lo += t.coef * Rational(static_cast<long>(*low));
        } else {
          r.lo.reset();
        }
      }
      if (r.hi) {
        if (high) {
          *r.hi += t.coef * Rational(static_cast<long>(*high));
        } else {
          r.hi.reset();
        }
      }
    }
    return r;
  }

  /// Truth of the literal on the current domain box, when decided.
  std::optional<bool> box_truth(const Literal& l) const {
    const LinearAtom& a = l.atom();
    Interval r = range_of(a);
    std::optional<bool> atom;
    if (a.relation() == Relation::le) {
      if (r.hi && *r.hi <= a.constant()) atom = true;
      if (r.lo && *r.lo > a.constant()) atom = false;
    } else {
      if (r.lo && r.hi && *r.lo == *r.hi && *r.lo == a.constant()) atom = true;
      if ((r.lo && *r.lo > a.constant()) || (r.hi && *r.hi < a.constant())) atom = false;
    }
    if (!atom) return std::nullopt;
    return *atom == l.positive();
  }

  void tighten(ArithId v, std::optional<std::int64_t> lo, std::optional<std::int64_t> hi, const std::string& origin) {
    auto& var = f_.vars.arith(v);
    if (lo && (!var.lower || *lo > *var.lower)) var.lower = lo;
    if (hi && (!var.upper || *hi < *var.upper)) var.upper = hi;
    if (var.lower && var.upper && *var.lower > *var.upper) {
      conflict("empty domain for " + var.name, {origin, "domain:" + var.name});
    }
  }

  /// Folds a single-variable unit literal into the variable's domain.
  bool absorb(const Literal& l, const std::string& origin) {
    const LinearAtom& a = l.atom();
    if (a.terms().size() != 1) return false;
    const ArithId v = a.terms()[0].var;
    const int sign = a.terms()[0].coef > 0 ? 1 : -1;  // canonical single-term coefficient is ±1
    const std::int64_t c = to_int64(a.constant().get_num());
    if (a.relation() == Relation::le) {
      // sign·x ≤ c, or its negation sign·x ≥ c + 1
      if (l.positive()) {
        sign > 0 ? tighten(v, std::nullopt, c, origin) : tighten(v, -c, std::nullopt, origin);
      } else {
        sign > 0 ? tighten(v, c + 1, std::nullopt, origin) : tighten(v, std::nullopt, -c - 1, origin);
      }
      return true;
    }
    if (l.positive()) {
      tighten(v, c, c, origin);
      return true;
    }
    const auto& var = f_.vars.arith(v);
    if (var.lower && *var.lower == c) {
      tighten(v, c + 1, std::nullopt, origin);
      return true;
    }
    if (var.upper && *var.upper == c) {
      tighten(v, std::nullopt, c - 1, origin);
      return true;
    }
    return false;
  }

  bool simplify_pass() {
    bool changed = false;
    std::vector<Clause> out;
    out.reserve(f_.hard.size());
    std::unordered_set<std::string> seen;
    for (auto& c : f_.hard) {
      std::vector<Literal> lits;
      bool sat = false;
      for (const auto& l : c.literals) {
        if (l.is_bool()) {
          auto it = map_.bools_.find(l.bool_var());
          if (it != map_.bools_.end()) {
            if (it->second == l.positive()) sat = true;
            continue;
          }
        } else if (auto t = box_truth(l)) {
          if (*t) sat = true;
          continue;
        }
        if (std::find(lits.begin(), lits.end(), ~l) != lits.end()) sat = true;
        if (std::find(lits.begin(), lits.end(), l) == lits.end()) lits.push_back(l);
        if (sat) break;
      }
      if (sat) {
        changed = true;
        continue;
      }
      if (lits.empty()) conflict("hard clause '" + c.origin + "' falsified", {c.origin});
      if (lits.size() != c.literals.size()) changed = true;
      if (lits.size() == 1) {
        const Literal& l = lits.front();
        if (l.is_bool()) {
          map_.bools_[l.bool_var()] = l.positive();
          changed = true;
          continue;
        }
        if (absorb(l, c.origin)) {
          changed = true;
          continue;
        }
      }
      Clause nc{std::move(lits), std::move(c.origin)};
      if (!seen.insert(clause_key(nc)).second) {
        changed = true;
        continue;
      }
      out.push_back(std::move(nc));
    }
    f_.hard = std::move(out);
    return fuse() || changed;
  }

  /// Combines unit bounds on the same linear form; opposite bounds that meet
  /// become an equation, dominated bounds are dropped.
  bool fuse() {
    struct Bounds {
      std::optional<Rational> lo, hi;
      std::vector<std::size_t> clauses;
      bool has_eq = false;
      std::vector<Term> terms;  // the sign-normalized form
    };
    std::map<std::string, Bounds> forms;
    for (std::size_t i = 0; i < f_.hard.size(); ++i) {
      const Clause& c = f_.hard[i];
      if (!c.is_unit() || c.literals[0].is_bool()) continue;
      const Literal& l = c.literals[0];
      const LinearAtom& a = l.atom();
      if (a.terms().size() < 2) continue;
      if (a.relation() == Relation::eq && !l.positive()) continue;
      const int sign = a.terms()[0].coef > 0 ? 1 : -1;
      auto& b = forms[form_key(a, sign)];
      if (b.terms.empty()) {
        for (const auto& t : a.terms()) b.terms.push_back(Term{t.coef * sign, t.var});
      }
      b.clauses.push_back(i);
      Rational lo, hi;
      bool has_lo = false, has_hi = false;
      if (a.relation() == Relation::eq) {
        lo = hi = a.constant();
        has_lo = has_hi = true;
        b.has_eq = true;
      } else if (sign > 0) {
        if (l.positive()) {
          hi = a.constant(), has_hi = true;
        } else {
          lo = a.constant() + 1, has_lo = true;
        }
      } else if (l.positive()) {
        lo = -a.constant(), has_lo = true;
      } else {
        hi = -a.constant() - 1, has_hi = true;
      }
      if (has_lo && (!b.lo || lo > *b.lo)) b.lo = lo;
      if (has_hi && (!b.hi || hi < *b.hi)) b.hi = hi;
    }
    bool changed = false;
    std::vector<bool> drop(f_.hard.size(), false);
    std::vector<Clause> added;
    for (auto& [key, b] : forms) {
      if (b.clauses.size() < 2) continue;
      if (b.lo && b.hi && *b.lo > *b.hi) {
        std::vector<std::string> origins;
        for (auto i : b.clauses) origins.push_back(f_.hard[i].origin);
        conflict("contradictory bounds on one linear form", origins);
      }
      const bool meets = b.lo && b.hi && *b.lo == *b.hi;
      const std::size_t wanted = meets ? 1 : static_cast<std::size_t>(b.lo.has_value()) + b.hi.has_value();
      if (wanted >= b.clauses.size()) continue;
      const std::string origin = f_.hard[b.clauses.front()].origin;
      for (auto i : b.clauses) drop[i] = true;
      changed = true;
      LinearExpr form;
      for (const auto& t : b.terms) form += LinearExpr(t.var) * t.coef;
      if (meets) {
        added.push_back(*make_clause({eq(form, *b.lo)}, origin));
        continue;
      }
      if (b.lo) added.push_back(*make_clause({ge(form, *b.lo)}, origin));
      if (b.hi) added.push_back(*make_clause({le(form, *b.hi)}, origin));
    }
    if (!changed) return false;
    std::vector<Clause> out;
    for (std::size_t i = 0; i < f_.hard.size(); ++i) {
      if (!drop[i]) out.push_back(std::move(f_.hard[i]));
    }
    for (auto& c : added) out.push_back(std::move(c));
    f_.hard = std::move(out);
    return true;
  }

  bool simplify() {
    bool any = false;
    while (simplify_pass()) any = true;
    return any;
  }

  struct Row {
    std::map<std::uint32_t, Rational> coef;
    Rational rhs;
    std::vector<std::string> origins;
  };

  std::vector<ArithId> eliminate() {
    std::vector<Row> rows;
    std::vector<bool> referenced(f_.vars.arith_count(), false);
    for (const auto& c : f_.hard) {
      for (const auto& l : c.literals) {
        if (!l.is_bool()) {
          for (const auto& t : l.atom().terms()) referenced[t.var.index] = true;
        }
      }
      if (!c.is_unit() || c.literals[0].is_bool() || !c.literals[0].positive()) continue;
      const LinearAtom& a = c.literals[0].atom();
      if (a.relation() != Relation::eq) continue;
      Row r;
      for (const auto& t : a.terms()) r.coef[t.var.index] = t.coef;
      r.rhs = a.constant();
      r.origins.push_back(c.origin);
      rows.push_back(std::move(r));
    }
    for (std::uint32_t i = 0; i < f_.vars.arith_count(); ++i) {
      const auto& v = f_.vars.arith(ArithId{i});
      if (!referenced[i] || protected_[i] || map_.mask_[i]) continue;
      if (v.lower && v.upper && *v.lower == *v.upper) {
        Row r;
        r.coef[i] = 1;
        r.rhs = Rational(static_cast<long>(*v.lower));
        r.origins.push_back("domain:" + v.name);
        rows.push_back(std::move(r));
      }
    }

    // Gauss-Jordan to reduced row echelon form over the rationals.
    std::vector<std::pair<std::uint32_t, Row>> pivots;
    for (auto& row : rows) {
      for (const auto& [p, prow] : pivots) {
        auto it = row.coef.find(p);
        if (it == row.coef.end()) continue;
        Rational k = it->second;
        add_scaled(row, prow, -k);
      }
      if (row.coef.empty()) {
        if (row.rhs != 0) conflict("inconsistent unit equations", row.origins);
        continue;
      }
      auto pivot = choose_pivot(row);
      if (!pivot) continue;
      Rational inv = Rational(1) / row.coef[*pivot];
      for (auto& [v, c] : row.coef) c *= inv;
      row.rhs *= inv;
      for (auto& [p, prow] : pivots) {
        auto it = prow.coef.find(*pivot);
        if (it == prow.coef.end()) continue;
        Rational k = it->second;
        add_scaled(prow, row, -k);
      }
      pivots.emplace_back(*pivot, std::move(row));
    }

    std::vector<std::pair<ArithId, LinearExpr>> solved;
    for (const auto& [p, row] : pivots) {
      if (row.coef.size() > 2) continue;
      LinearExpr expr(row.rhs);
      bool integral = row.rhs.get_den() == 1;
      for (const auto& [v, c] : row.coef) {
        if (v == p) continue;
        if (c.get_den() != 1) integral = false;
        expr -= LinearExpr(ArithId{v}) * c;
      }
      if (!integral) {
        if (row.coef.size() == 1) {
          conflict("non-integral forced value for " + f_.vars.arith(ArithId{p}).name, row.origins);
        }
        continue;
      }
      solved.emplace_back(ArithId{p}, std::move(expr));
    }
    if (solved.empty()) return {};
    apply(solved);
    std::vector<ArithId> out;
    for (const auto& [v, e] : solved) out.push_back(v);
    return out;
  }

  static void add_scaled(Row& target, const Row& source, const Rational& k) {
    for (const auto& [v, c] : source.coef) {
      auto& slot = target.coef[v];
      slot += k * c;
      if (slot == 0) target.coef.erase(v);
    }
    target.rhs += k * source.rhs;
    target.origins.insert(target.origins.end(), source.origins.begin(), source.origins.end());
  }

  std::optional<std::uint32_t> choose_pivot(const Row& row) const {
    mpz_class lcm = 1;
    for (const auto& [v, c] : row.coef) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), c.get_den_mpz_t());
    mpz_class g = 0;
    for (const auto& [v, c] : row.coef) {
      mpz_class n = c.get_num() * (lcm / c.get_den());
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
    }
    std::optional<std::uint32_t> best;
    mpz_class best_mag;
    for (const auto& [v, c] : row.coef) {
      if (protected_[v]) continue;
      mpz_class mag = abs(c.get_num() * (lcm / c.get_den()) / g);
      if (!best || mag < best_mag) {
        best = v;
        best_mag = mag;
      }
    }
    return best;
  }

  LitOrConst substitute(const Literal& l, const std::unordered_map<std::uint32_t, const LinearExpr*>& subs) const {
    if (l.is_bool()) return l;
    const LinearAtom& a = l.atom();
    bool touched = false;
    LinearExpr lhs;
    for (const auto& t : a.terms()) {
      auto it = subs.find(t.var.index);
      if (it == subs.end()) {
        lhs += LinearExpr(t.var) * t.coef;
      } else {
        lhs += *it->second * t.coef;
        touched = true;
      }
    }
    if (!touched) return l;
    LitOrConst r = compare(lhs, a.relation() == Relation::le ? Cmp::le : Cmp::eq, LinearExpr(a.constant()));
    return l.positive() ? r : negate(r);
  }

  void apply(const std::vector<std::pair<ArithId, LinearExpr>>& solved) {
    std::unordered_map<std::uint32_t, const LinearExpr*> subs;
    for (const auto& [v, e] : solved) subs.emplace(v.index, &e);

    for (auto& s : map_.subs_) {
      LinearExpr composed(s.expr.constant());
      for (const auto& [v, c] : s.expr.coefs()) {
        auto it = subs.find(v);
        composed += (it == subs.end() ? LinearExpr(ArithId{v}) : *it->second) * c;
      }
      s.expr = std::move(composed);
    }
    for (const auto& [v, e] : solved) {
      map_.subs_.push_back({v, e});
      map_.mask_[v.index] = true;
    }

    std::vector<Clause> out;
    out.reserve(f_.hard.size());
    for (auto& c : f_.hard) {
      std::vector<LitOrConst> lits;
      for (const auto& l : c.literals) lits.push_back(substitute(l, subs));
      bool sat = false;
      std::vector<Literal> kept;
      for (auto& l : lits) {
        if (const bool* b = std::get_if<bool>(&l)) {
          if (*b) sat = true;
          continue;
        }
        kept.push_back(std::get<Literal>(std::move(l)));
      }
      if (sat) continue;
      if (kept.empty()) conflict("hard clause '" + c.origin + "' falsified by substitution", {c.origin});
      out.push_back(Clause{std::move(kept), std::move(c.origin)});
    }
    // The eliminated variables keep their domains through their expressions.
    for (const auto& [v, e] : solved) {
      const auto& var = f_.vars.arith(v);
      const std::string origin = "domain:" + var.name;
      if (var.lower) {
        auto lit = ge(e, *var.lower);
        if (const bool* b = std::get_if<bool>(&lit)) {
          if (!*b) conflict("domain of " + var.name + " violated", {origin});
        } else {
          out.push_back(Clause{{std::get<Literal>(lit)}, origin});
        }
      }
      if (var.upper) {
        auto lit = le(e, *var.upper);
        if (const bool* b = std::get_if<bool>(&lit)) {
          if (!*b) conflict("domain of " + var.name + " violated", {origin});
        } else {
          out.push_back(Clause{{std::get<Literal>(lit)}, origin});
        }
      }
    }
    f_.hard = std::move(out);
  }

  Formula f_;
  std::vector<bool> protected_;
  EliminationMap map_;
};

ReducedFormula unit_equation_elimination(const Formula& f, const EliminationOptions& options) {
  return Eliminator(f, options).run();
}

}  // namespace reflow
