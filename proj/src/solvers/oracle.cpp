#include <algorithm>
#include <map>
#include <numeric>

#include "reflow/solvers.hpp"

namespace reflow {

namespace {

mpz_class floor_q(const Rational& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

mpz_class ceil_q(const Rational& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

/// Bounded-variable simplex over exact rationals with Bland's rule.
/// Variables are integers; slack rows have integer coefficients so their
/// bounds are rounded as well.
class Simplex {
 public:
  explicit Simplex(std::size_t n) : lo_(n), hi_(n), beta_(n, Rational(0)), row_of_(n, -1) {}

  std::size_t size() const { return beta_.size(); }
  const Rational& value(std::size_t v) const { return beta_[v]; }

  bool tighten_lower(std::size_t v, const Rational& bound) {
    Rational b(ceil_q(bound));
    if (lo_[v] && *lo_[v] >= b) return true;
    lo_[v] = b;
    if (hi_[v] && *hi_[v] < b) return false;
    if (row_of_[v] < 0 && beta_[v] < b) update(v, b);
    return true;
  }

  bool tighten_upper(std::size_t v, const Rational& bound) {
    Rational b(floor_q(bound));
    if (hi_[v] && *hi_[v] <= b) return true;
    hi_[v] = b;
    if (lo_[v] && *lo_[v] > b) return false;
    if (row_of_[v] < 0 && beta_[v] > b) update(v, b);
    return true;
  }

  /// lo ≤ Σ terms ≤ hi. Returns false on an immediate bound conflict.
  bool add_row(const std::vector<std::pair<std::size_t, Rational>>& terms, const std::optional<Rational>& lo,
               const std::optional<Rational>& hi) {
    if (terms.size() == 1) {
      const auto& [v, a] = terms.front();
      std::optional<Rational> l, h;
      if (lo) (a > 0 ? l : h) = *lo / a;
      if (hi) (a > 0 ? h : l) = *hi / a;
      if (l && !tighten_lower(v, *l)) return false;
      if (h && !tighten_upper(v, *h)) return false;
      return true;
    }
    const std::size_t s = beta_.size();
    lo_.emplace_back();
    hi_.emplace_back();
    beta_.emplace_back(0);
    row_of_.push_back(static_cast<int>(rows_.size()));
    for (auto& r : rows_) r.coef.emplace_back(0);
    Row row;
    row.basic = s;
    row.coef.assign(s + 1, Rational(0));
    for (const auto& [v, a] : terms) {
      if (row_of_[v] < 0) {
        row.coef[v] += a;
      } else {
        const Row& def = rows_[row_of_[v]];
        for (std::size_t k = 0; k < def.coef.size(); ++k) {
          if (sgn(def.coef[k]) != 0) row.coef[k] += a * def.coef[k];
        }
      }
    }
    Rational value = 0;
    for (std::size_t k = 0; k < s; ++k) {
      if (sgn(row.coef[k]) != 0) value += row.coef[k] * beta_[k];
    }
    beta_[s] = value;
    rows_.push_back(std::move(row));
    if (lo && !tighten_lower(s, *lo)) return false;
    if (hi && !tighten_upper(s, *hi)) return false;
    return true;
  }

  bool check() {
    for (;;) {
      int row = -1;
      std::size_t best = beta_.size();
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        std::size_t b = rows_[r].basic;
        if (b < best && violated(b)) {
          best = b;
          row = static_cast<int>(r);
        }
      }
      if (row < 0) return true;
      Row& R = rows_[row];
      const std::size_t b = R.basic;
      const bool below = lo_[b] && beta_[b] < *lo_[b];
      std::size_t pick = beta_.size();
      for (std::size_t j = 0; j < R.coef.size(); ++j) {
        int s = sgn(R.coef[j]);
        if (s == 0 || row_of_[j] >= 0) continue;
        bool can_up = !hi_[j] || beta_[j] < *hi_[j];
        bool can_down = !lo_[j] || beta_[j] > *lo_[j];
        bool ok = below ? ((s > 0 && can_up) || (s < 0 && can_down)) : ((s < 0 && can_up) || (s > 0 && can_down));
        if (ok) {
          pick = j;
          break;
        }
      }
      if (pick == beta_.size()) return false;
      pivot_and_update(static_cast<std::size_t>(row), pick, below ? *lo_[b] : *hi_[b]);
    }
  }

 private:
  struct Row {
    std::size_t basic = 0;
    std::vector<Rational> coef;
  };

  bool violated(std::size_t v) const {
    return (lo_[v] && beta_[v] < *lo_[v]) || (hi_[v] && beta_[v] > *hi_[v]);
  }

  void update(std::size_t j, const Rational& v) {
    Rational delta = v - beta_[j];
    for (const auto& r : rows_) {
      if (sgn(r.coef[j]) != 0) beta_[r.basic] += r.coef[j] * delta;
    }
    beta_[j] = v;
  }

  void pivot_and_update(std::size_t r, std::size_t j, const Rational& v) {
    Row& R = rows_[r];
    const std::size_t b = R.basic;
    Rational theta = (v - beta_[b]) / R.coef[j];
    beta_[b] = v;
    beta_[j] += theta;
    for (std::size_t r2 = 0; r2 < rows_.size(); ++r2) {
      if (r2 != r && sgn(rows_[r2].coef[j]) != 0) beta_[rows_[r2].basic] += rows_[r2].coef[j] * theta;
    }
    pivot(r, j);
  }

  void pivot(std::size_t r, std::size_t j) {
    Row& R = rows_[r];
    const std::size_t b = R.basic;
    Rational a = R.coef[j];
    std::vector<std::size_t> nz;
    for (std::size_t k = 0; k < R.coef.size(); ++k) {
      if (k == j || sgn(R.coef[k]) == 0) {
        R.coef[k] = 0;
        continue;
      }
      R.coef[k] = -R.coef[k] / a;
      nz.push_back(k);
    }
    R.coef[j] = 0;
    R.coef[b] = Rational(1) / a;
    nz.push_back(b);
    R.basic = j;
    row_of_[j] = static_cast<int>(r);
    row_of_[b] = -1;
    for (std::size_t r2 = 0; r2 < rows_.size(); ++r2) {
      if (r2 == r) continue;
      Row& O = rows_[r2];
      if (sgn(O.coef[j]) == 0) continue;
      Rational c = O.coef[j];
      O.coef[j] = 0;
      for (std::size_t k : nz) O.coef[k] += c * R.coef[k];
    }
  }

  std::vector<std::optional<Rational>> lo_;
  std::vector<std::optional<Rational>> hi_;
  std::vector<Rational> beta_;
  std::vector<int> row_of_;
  std::vector<Row> rows_;
};

class Search {
 public:
  Search(const Formula& f, std::vector<const Clause*> clauses, const std::vector<Literal>& assumptions,
         std::uint64_t max_nodes)
      : f_(f), clauses_(std::move(clauses)), max_nodes_(max_nodes), bools_(f.vars.bool_count()) {
    local_.assign(f.vars.arith_count(), -1);
    auto note = [&](const Literal& l) {
      if (l.is_bool()) return;
      for (const auto& t : l.atom().terms()) {
        if (local_[t.var.index] < 0) {
          local_[t.var.index] = static_cast<int>(vars_.size());
          vars_.push_back(t.var);
        }
      }
    };
    for (const Clause* c : clauses_) {
      for (const auto& l : c->literals) note(l);
    }
    for (const auto& a : assumptions) {
      if (!a.is_bool()) throw Error("assumptions must be boolean literals");
      auto& slot = bools_[a.bool_var().index];
      if (slot && *slot != a.positive()) assumption_conflict_ = true;
      slot = a.positive();
    }
  }

  std::optional<Model> run() {
    if (assumption_conflict_) return std::nullopt;
    if (!dfs()) return std::nullopt;
    Model m(f_.vars.arith_count(), f_.vars.bool_count());
    for (std::size_t i = 0; i < vars_.size(); ++i) m.set(vars_[i], solution_[i]);
    for (std::uint32_t i = 0; i < bools_.size(); ++i) {
      if (bools_[i]) m.set(BoolId{i}, *bools_[i]);
    }
    complete_model(m, f_.vars);
    return m;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  enum class ClauseState { satisfied, conflict, open };

  bool asserted(const Literal& l) const {
    return std::find(trail_.begin(), trail_.end(), l) != trail_.end();
  }

  ClauseState classify(const Clause& c, std::vector<const Literal*>& candidates) const {
    candidates.clear();
    for (const auto& l : c.literals) {
      if (l.is_bool()) {
        const auto& v = bools_[l.bool_var().index];
        if (!v) {
          candidates.push_back(&l);
        } else if (*v == l.positive()) {
          return ClauseState::satisfied;
        }
      } else {
        if (asserted(l)) return ClauseState::satisfied;
        if (!asserted(~l)) candidates.push_back(&l);
      }
    }
    return candidates.empty() ? ClauseState::conflict : ClauseState::open;
  }

  void assert_literal(const Literal& l) {
    if (l.is_bool()) {
      bools_[l.bool_var().index] = l.positive();
      bool_trail_.push_back(l.bool_var());
    } else {
      trail_.push_back(l);
    }
  }

  bool propagate() {
    std::vector<const Literal*> candidates;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Clause* c : clauses_) {
        ClauseState s = classify(*c, candidates);
        if (s == ClauseState::conflict) return false;
        if (s == ClauseState::open && candidates.size() == 1) {
          assert_literal(*candidates.front());
          changed = true;
        }
      }
    }
    return true;
  }

  Simplex relaxation(std::vector<std::pair<std::vector<std::pair<std::size_t, Rational>>, Rational>>& ne,
                     bool& ok) const {
    Simplex s(vars_.size());
    ok = true;
    for (std::size_t i = 0; i < vars_.size() && ok; ++i) {
      const auto& info = f_.vars.arith(vars_[i]);
      if (info.lower) ok = s.tighten_lower(i, Rational(static_cast<long>(*info.lower)));
      if (ok && info.upper) ok = s.tighten_upper(i, Rational(static_cast<long>(*info.upper)));
    }
    for (const auto& l : trail_) {
      if (!ok) break;
      const LinearAtom& a = l.atom();
      std::vector<std::pair<std::size_t, Rational>> terms;
      for (const auto& t : a.terms()) terms.emplace_back(static_cast<std::size_t>(local_[t.var.index]), t.coef);
      if (a.relation() == Relation::le) {
        ok = l.positive() ? s.add_row(terms, std::nullopt, a.constant())
                          : s.add_row(terms, a.constant() + 1, std::nullopt);
      } else if (l.positive()) {
        ok = s.add_row(terms, a.constant(), a.constant());
      } else {
        ne.emplace_back(std::move(terms), a.constant());
      }
    }
    return s;
  }

  bool integer_search(Simplex s,
                      const std::vector<std::pair<std::vector<std::pair<std::size_t, Rational>>, Rational>>& ne,
                      int depth = 0) {
    if (++nodes_ > max_nodes_) throw LimitError("oracle node limit exceeded");
    if (depth > kMaxBranchDepth) throw LimitError("oracle branch depth exceeded");
    if (!s.check()) return false;
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      const Rational& x = s.value(v);
      if (x.get_den() == 1) continue;
      Simplex down = s;
      if (down.tighten_upper(v, Rational(floor_q(x))) && integer_search(std::move(down), ne, depth + 1)) return true;
      Simplex up = std::move(s);
      return up.tighten_lower(v, Rational(ceil_q(x))) && integer_search(std::move(up), ne, depth + 1);
    }
    for (const auto& [terms, k] : ne) {
      Rational sum = 0;
      for (const auto& [v, a] : terms) sum += a * s.value(v);
      if (sum != k) continue;
      Simplex below = s;
      if (below.add_row(terms, std::nullopt, k - 1) && integer_search(std::move(below), ne, depth + 1)) return true;
      Simplex above = std::move(s);
      return above.add_row(terms, k + 1, std::nullopt) && integer_search(std::move(above), ne, depth + 1);
    }
    solution_.resize(vars_.size());
    for (std::size_t v = 0; v < vars_.size(); ++v) solution_[v] = to_int64(s.value(v).get_num());
    return true;
  }

  bool dfs() {
    if (++nodes_ > max_nodes_) throw LimitError("oracle node limit exceeded");
    const std::size_t bool_mark = bool_trail_.size();
    const std::size_t arith_mark = trail_.size();
    auto undo = [&] {
      while (bool_trail_.size() > bool_mark) {
        bools_[bool_trail_.back().index].reset();
        bool_trail_.pop_back();
      }
      trail_.erase(trail_.begin() + static_cast<std::ptrdiff_t>(arith_mark), trail_.end());
    };
    if (!propagate()) {
      undo();
      return false;
    }
    std::vector<std::pair<std::vector<std::pair<std::size_t, Rational>>, Rational>> ne;
    bool ok = false;
    Simplex relaxed = relaxation(ne, ok);
    if (!ok || !relaxed.check()) {
      undo();
      return false;
    }
    std::vector<const Literal*> candidates;
    const Clause* open = nullptr;
    for (const Clause* c : clauses_) {
      if (classify(*c, candidates) == ClauseState::open) {
        open = c;
        break;
      }
    }
    if (!open) {
      if (integer_search(std::move(relaxed), ne)) return true;
      undo();
      return false;
    }
    std::vector<Literal> choices;
    for (const Literal* l : candidates) choices.push_back(*l);
    for (std::size_t i = 0; i < choices.size(); ++i) {
      const std::size_t b2 = bool_trail_.size();
      const std::size_t a2 = trail_.size();
      for (std::size_t k = 0; k < i; ++k) assert_literal(~choices[k]);
      assert_literal(choices[i]);
      if (dfs()) return true;
      while (bool_trail_.size() > b2) {
        bools_[bool_trail_.back().index].reset();
        bool_trail_.pop_back();
      }
      trail_.erase(trail_.begin() + static_cast<std::ptrdiff_t>(a2), trail_.end());
    }
    undo();
    return false;
  }

  const Formula& f_;
  std::vector<const Clause*> clauses_;
  std::uint64_t max_nodes_;
  static constexpr int kMaxBranchDepth = 400;
  std::uint64_t nodes_ = 0;
  std::vector<std::optional<bool>> bools_;
  std::vector<BoolId> bool_trail_;
  std::vector<Literal> trail_;
  std::vector<int> local_;
  std::vector<ArithId> vars_;
  std::vector<std::int64_t> solution_;
  bool assumption_conflict_ = false;
};

std::string assumption_tag(const Literal& l, const VarRegistry& vars) {
  return std::string("assume:") + (l.positive() ? "" : "!") + vars.boolean(l.bool_var()).name;
}

}  // namespace

SolverResult OracleBackend::check(const Formula& f, const std::vector<Clause>& extra,
                                  const std::vector<Literal>& assumptions, bool want_core) {
  std::vector<const Clause*> all;
  for (const auto& c : f.hard) all.push_back(&c);
  for (const auto& c : extra) all.push_back(&c);

  SolverResult r;
  Search search(f, all, assumptions, limits_.max_nodes);
  auto model = search.run();
  r.stats.steps = search.nodes();
  r.stats.calls = 1;
  if (model) {
    r.status = Status::sat;
    r.model = std::move(model);
    return r;
  }
  r.status = Status::unsat;
  if (!want_core) return r;

  // Deletion-based minimization over origin groups and assumptions.
  std::vector<std::string> groups;
  for (const Clause* c : all) {
    if (std::find(groups.begin(), groups.end(), c->origin) == groups.end()) groups.push_back(c->origin);
  }
  const std::size_t clause_groups = groups.size();
  for (const auto& a : assumptions) groups.push_back(assumption_tag(a, f.vars));
  std::vector<bool> keep(groups.size(), true);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    keep[g] = false;
    std::vector<const Clause*> subset;
    for (const Clause* c : all) {
      auto idx = std::find(groups.begin(), groups.begin() + clause_groups, c->origin) - groups.begin();
      if (keep[idx]) subset.push_back(c);
    }
    std::vector<Literal> assume;
    for (std::size_t i = 0; i < assumptions.size(); ++i) {
      if (keep[clause_groups + i]) assume.push_back(assumptions[i]);
    }
    Search probe(f, subset, assume, limits_.max_nodes);
    if (probe.run()) keep[g] = true;
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (keep[g]) r.core.push_back(groups[g]);
  }
  return r;
}

SolverResult OracleBackend::maxsmt(const SolverRequest& req) {
  const Formula& f = *req.formula;
  const auto& softs = f.soft;
  const std::size_t n = softs.size();
  if (n > limits_.max_soft) throw LimitError("oracle soft limit exceeded (" + std::to_string(n) + ")");

  std::vector<std::uint64_t> masks(std::size_t{1} << n);
  std::iota(masks.begin(), masks.end(), 0);
  auto weight = [&](std::uint64_t m) {
    std::int64_t w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (m >> i & 1) w += softs[i].weight;
    }
    return w;
  };
  std::stable_sort(masks.begin(), masks.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return weight(a) > weight(b); });

  SolverResult base = check(f, req.extra, req.assumptions, req.want_core);
  std::uint64_t calls = 1;
  if (base.status != Status::sat) {
    base.stats.calls = calls;
    return base;
  }
  std::vector<std::uint64_t> infeasible;
  for (std::uint64_t mask : masks) {
    bool dominated = std::any_of(infeasible.begin(), infeasible.end(),
                                 [&](std::uint64_t bad) { return (bad & mask) == bad; });
    if (dominated) continue;
    std::vector<Literal> assume = req.assumptions;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) assume.push_back(Literal::boolean(softs[i].var, softs[i].positive));
    }
    SolverResult r = mask == 0 ? base : check(f, req.extra, assume, false);
    calls += mask != 0;
    if (r.status == Status::sat) {
      r.soft_weight = soft_weight(softs, *r.model);
      r.stats.calls = calls;
      return r;
    }
    infeasible.push_back(mask);
  }
  throw Error("unreachable: empty soft set is feasible");
}

}  // namespace reflow
