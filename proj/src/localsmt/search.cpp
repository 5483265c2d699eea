#include <algorithm>
#include <chrono>
#include <limits>
#include <random>
#include <unordered_map>

#include "reflow/localsmt.hpp"

namespace reflow {

namespace {

constexpr std::int64_t neg_inf = std::numeric_limits<std::int64_t>::min() / 4;
constexpr std::int64_t pos_inf = std::numeric_limits<std::int64_t>::max() / 4;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

struct CAtom {
  std::vector<std::pair<std::uint32_t, std::int64_t>> terms;  // (local var, coef)
  std::int64_t k = 0;
  bool is_eq = false;
  bool holds(std::int64_t sum) const { return is_eq ? sum == k : sum <= k; }
};

struct CLit {
  bool is_bool = false;
  std::uint32_t index = 0;  // atom or bool index
  bool positive = true;
};

struct Move {
  bool is_bool = false;
  std::uint32_t var = 0;
  std::int64_t value = 0;
};

}  // namespace

struct LocalSearch::Impl {
  const EliminationMap* map = nullptr;
  VarRegistry registry;
  std::vector<ArithId> vars;  // local → registry
  std::vector<BoolId> bools;
  std::vector<std::int64_t> lo, hi;
  std::vector<bool> frozen;
  std::vector<CAtom> atoms;
  std::vector<std::vector<CLit>> clauses;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> var_atoms;  // var → (atom, coef)
  std::vector<std::vector<std::pair<std::uint32_t, bool>>> atom_clauses;      // atom → (clause, positive)
  std::vector<std::vector<std::pair<std::uint32_t, bool>>> bool_clauses;      // bool → (clause, positive)

  // search state
  std::vector<std::int64_t> val;
  std::vector<bool> bval;
  std::vector<std::int64_t> sum;
  std::vector<bool> atom_true;
  std::vector<std::uint32_t> true_count;
  std::vector<std::int64_t> weight;
  std::vector<std::uint32_t> falsified;
  std::vector<std::int64_t> fpos;
  std::vector<std::uint64_t> tabu_until;
  std::vector<std::uint64_t> btabu_until;
  std::vector<std::int32_t> delta;
  std::vector<std::uint32_t> stamp;
  std::vector<std::uint32_t> touched;
  std::uint32_t stamp_counter = 0;
  std::mt19937_64 rng;

  Impl(const ReducedFormula& reduced, const std::vector<ArithId>& frozen_vars) {
    map = &reduced.map;
    registry = reduced.formula.vars;
    std::unordered_map<std::uint32_t, std::uint32_t> local;
    std::unordered_map<std::uint32_t, std::uint32_t> blocal;
    std::unordered_map<std::string, std::uint32_t> atom_index;
    auto var_of = [&](ArithId v) {
      auto [it, inserted] = local.emplace(v.index, static_cast<std::uint32_t>(vars.size()));
      if (inserted) {
        vars.push_back(v);
        const auto& info = registry.arith(v);
        lo.push_back(info.lower.value_or(neg_inf));
        hi.push_back(info.upper.value_or(pos_inf));
        frozen.push_back(false);
        var_atoms.emplace_back();
      }
      return it->second;
    };
    for (auto v : frozen_vars) frozen[var_of(v)] = true;
    for (const auto& c : reduced.formula.hard) {
      std::vector<CLit> lits;
      const auto ci = static_cast<std::uint32_t>(clauses.size());
      for (const auto& l : c.literals) {
        CLit cl;
        cl.positive = l.positive();
        if (l.is_bool()) {
          auto [it, inserted] = blocal.emplace(l.bool_var().index, static_cast<std::uint32_t>(bools.size()));
          if (inserted) {
            bools.push_back(l.bool_var());
            bool_clauses.emplace_back();
          }
          cl.is_bool = true;
          cl.index = it->second;
          bool_clauses[cl.index].emplace_back(ci, cl.positive);
        } else {
          const LinearAtom& a = l.atom();
          std::string key;
          for (const auto& t : a.terms()) key += t.coef.get_str() + "*" + std::to_string(t.var.index) + " ";
          key += (a.relation() == Relation::eq ? "= " : "<= ") + a.constant().get_str();
          auto [it, inserted] = atom_index.emplace(key, static_cast<std::uint32_t>(atoms.size()));
          if (inserted) {
            CAtom ca;
            ca.is_eq = a.relation() == Relation::eq;
            ca.k = to_int64(a.constant().get_num());
            for (const auto& t : a.terms()) {
              std::uint32_t lv = var_of(t.var);
              std::int64_t coef = to_int64(t.coef.get_num());
              ca.terms.emplace_back(lv, coef);
              var_atoms[lv].emplace_back(it->second, coef);
            }
            atoms.push_back(std::move(ca));
            atom_clauses.emplace_back();
          }
          cl.index = it->second;
          atom_clauses[cl.index].emplace_back(ci, cl.positive);
        }
        lits.push_back(cl);
      }
      clauses.push_back(std::move(lits));
    }
    val.assign(vars.size(), 0);
    bval.assign(bools.size(), false);
    sum.assign(atoms.size(), 0);
    atom_true.assign(atoms.size(), false);
    true_count.assign(clauses.size(), 0);
    weight.assign(clauses.size(), 1);
    fpos.assign(clauses.size(), -1);
    tabu_until.assign(vars.size(), 0);
    btabu_until.assign(bools.size(), 0);
    delta.assign(clauses.size(), 0);
    stamp.assign(clauses.size(), 0);
  }

  bool lit_true(const CLit& l) const { return (l.is_bool ? bval[l.index] : atom_true[l.index]) == l.positive; }

  void set_falsified(std::uint32_t c, bool f) {
    if (f && fpos[c] < 0) {
      fpos[c] = static_cast<std::int64_t>(falsified.size());
      falsified.push_back(c);
    } else if (!f && fpos[c] >= 0) {
      std::uint32_t last = falsified.back();
      falsified[static_cast<std::size_t>(fpos[c])] = last;
      fpos[last] = fpos[c];
      falsified.pop_back();
      fpos[c] = -1;
    }
  }

  void initialize() {
    falsified.clear();
    std::fill(fpos.begin(), fpos.end(), -1);
    std::fill(weight.begin(), weight.end(), 1);
    std::fill(tabu_until.begin(), tabu_until.end(), 0);
    std::fill(btabu_until.begin(), btabu_until.end(), 0);
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      std::int64_t s = 0;
      for (const auto& [v, c] : atoms[a].terms) s += c * val[v];
      sum[a] = s;
      atom_true[a] = atoms[a].holds(s);
    }
    for (std::uint32_t c = 0; c < clauses.size(); ++c) {
      std::uint32_t n = 0;
      for (const auto& l : clauses[c]) n += lit_true(l);
      true_count[c] = n;
      set_falsified(c, n == 0);
    }
  }

  void bump(std::uint32_t c, std::int32_t d) {
    if (stamp[c] != stamp_counter) {
      stamp[c] = stamp_counter;
      delta[c] = 0;
      touched.push_back(c);
    }
    delta[c] += d;
  }

  std::int64_t collect_score() {
    std::int64_t score = 0;
    for (auto c : touched) {
      std::int64_t before = true_count[c];
      std::int64_t after = before + delta[c];
      if (before == 0 && after > 0) score += weight[c];
      if (before > 0 && after == 0) score -= weight[c];
    }
    return score;
  }

  std::int64_t score(const Move& m) {
    ++stamp_counter;
    touched.clear();
    if (m.is_bool) {
      for (const auto& [c, pos] : bool_clauses[m.var]) bump(c, (pos == m.value) ? 1 : -1);
      return collect_score();
    }
    const std::int64_t d = m.value - val[m.var];
    for (const auto& [a, coef] : var_atoms[m.var]) {
      bool now = atoms[a].holds(sum[a] + coef * d);
      if (now == atom_true[a]) continue;
      for (const auto& [c, pos] : atom_clauses[a]) bump(c, (pos == now) ? 1 : -1);
    }
    return collect_score();
  }

  void apply(const Move& m) {
    if (m.is_bool) {
      bool now = m.value != 0;
      if (bval[m.var] == now) return;
      bval[m.var] = now;
      for (const auto& [c, pos] : bool_clauses[m.var]) {
        if (pos == now) {
          if (true_count[c]++ == 0) set_falsified(c, false);
        } else if (--true_count[c] == 0) {
          set_falsified(c, true);
        }
      }
      return;
    }
    const std::int64_t d = m.value - val[m.var];
    val[m.var] = m.value;
    for (const auto& [a, coef] : var_atoms[m.var]) {
      sum[a] += coef * d;
      bool now = atoms[a].holds(sum[a]);
      if (now == atom_true[a]) continue;
      atom_true[a] = now;
      for (const auto& [c, pos] : atom_clauses[a]) {
        if (pos == now) {
          if (true_count[c]++ == 0) set_falsified(c, false);
        } else if (--true_count[c] == 0) {
          set_falsified(c, true);
        }
      }
    }
  }

  /// Threshold value for `v` making the literal on atom `a` true.
  std::optional<std::int64_t> critical(std::uint32_t a, bool positive, std::uint32_t v, std::int64_t coef) const {
    const CAtom& at = atoms[a];
    const std::int64_t s = sum[a];
    std::int64_t d;
    if (!at.is_eq) {
      if (positive) {
        d = coef > 0 ? floor_div(at.k - s, coef) : ceil_div(at.k - s, coef);
      } else {
        d = coef > 0 ? ceil_div(at.k + 1 - s, coef) : floor_div(at.k + 1 - s, coef);
      }
    } else if (positive) {
      if ((at.k - s) % coef != 0) return std::nullopt;
      d = (at.k - s) / coef;
    } else {
      return std::nullopt;  // handled by the caller with ±1 moves
    }
    std::int64_t nv = val[v] + d;
    if (d == 0 || nv < lo[v] || nv > hi[v]) return std::nullopt;
    return nv;
  }

  void candidates(std::uint32_t c, std::vector<Move>& out) const {
    out.clear();
    for (const auto& l : clauses[c]) {
      if (l.is_bool) {
        out.push_back(Move{true, l.index, bval[l.index] ? 0 : 1});
        continue;
      }
      const CAtom& at = atoms[l.index];
      for (const auto& [v, coef] : at.terms) {
        if (frozen[v]) continue;
        if (at.is_eq && !l.positive) {
          for (std::int64_t step : {std::int64_t{1}, std::int64_t{-1}}) {
            std::int64_t nv = val[v] + step;
            if (nv >= lo[v] && nv <= hi[v]) out.push_back(Move{false, v, nv});
          }
          continue;
        }
        if (auto nv = critical(l.index, l.positive, v, coef)) out.push_back(Move{false, v, *nv});
      }
    }
  }

  std::uint32_t pick_falsified() {
    std::int64_t total = 0;
    for (auto c : falsified) total += weight[c];
    std::int64_t r = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(total));
    for (auto c : falsified) {
      r -= weight[c];
      if (r < 0) return c;
    }
    return falsified.back();
  }

  SearchResult run(const Model& start, const SearchConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    rng.seed(config.seed);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      auto w = start.get(vars[i]);
      std::int64_t v = w ? *w : (lo[i] > neg_inf ? lo[i] : 0);
      if (frozen[i] && !w) throw Error("frozen variable '" + registry.arith(vars[i]).name + "' has no value");
      if (!frozen[i]) v = std::clamp(v, lo[i], hi[i]);
      val[i] = v;
    }
    for (std::size_t i = 0; i < bools.size(); ++i) bval[i] = start.get(bools[i]).value_or(false);
    initialize();

    SearchResult result;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (frozen[i] && (val[i] < lo[i] || val[i] > hi[i])) {
        result.best_falsified = falsified.size() + 1;
        result.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return result;
      }
    }
    std::size_t best = falsified.size();
    std::vector<Move> moves;
    std::uint64_t step = 0;
    while (!falsified.empty()) {
      if (step >= config.max_steps) break;
      if ((step & 63) == 0 && step > 0) {
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (ms > config.budget_ms) break;
      }
      ++step;
      std::uint32_t c = pick_falsified();
      candidates(c, moves);
      if (moves.empty()) {
        for (auto f : falsified) ++weight[f];
        continue;
      }
      std::int64_t best_score = std::numeric_limits<std::int64_t>::min();
      std::int64_t best_any_score = std::numeric_limits<std::int64_t>::min();
      std::size_t pick = moves.size();
      std::size_t pick_any = 0;
      for (std::size_t i = 0; i < moves.size(); ++i) {
        std::int64_t s = score(moves[i]);
        bool tabu = moves[i].is_bool ? btabu_until[moves[i].var] > step : tabu_until[moves[i].var] > step;
        if (s > best_any_score) {
          best_any_score = s;
          pick_any = i;
        }
        if (!tabu && s > best_score) {
          best_score = s;
          pick = i;
        }
      }
      Move chosen;
      if (pick < moves.size() && best_score > 0) {
        chosen = moves[pick];
      } else {
        for (auto f : falsified) ++weight[f];
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (coin(rng) < config.walk_probability) {
          chosen = moves[rng() % moves.size()];
        } else {
          chosen = moves[pick < moves.size() ? pick : pick_any];
        }
      }
      apply(chosen);
      if (chosen.is_bool) {
        btabu_until[chosen.var] = step + config.tabu_tenure;
      } else {
        tabu_until[chosen.var] = step + config.tabu_tenure;
      }
      best = std::min(best, falsified.size());
    }
    result.steps = step;
    result.best_falsified = best;
    if (falsified.empty()) {
      result.status = Status::sat;
      Model m = start;
      m.resize(registry.arith_count(), registry.bool_count());
      for (std::size_t i = 0; i < vars.size(); ++i) m.set(vars[i], val[i]);
      for (std::size_t i = 0; i < bools.size(); ++i) m.set(bools[i], bval[i]);
      // Unreferenced survivors keep their start value inside the domain.
      for (std::uint32_t i = 0; i < registry.arith_count(); ++i) {
        ArithId id{i};
        if (map->eliminated(id)) continue;
        const auto& info = registry.arith(id);
        auto v = m.get(id);
        std::int64_t x = v.value_or(info.lower.value_or(0));
        if (info.lower) x = std::max(x, *info.lower);
        if (info.upper) x = std::min(x, *info.upper);
        m.set(id, x);
      }
      map->extend(m);
      for (std::uint32_t i = 0; i < registry.bool_count(); ++i) {
        if (!m.get(BoolId{i})) m.set(BoolId{i}, false);
      }
      result.model = std::move(m);
    }
    result.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }
};

LocalSearch::LocalSearch(const ReducedFormula& reduced, std::vector<ArithId> frozen)
    : impl_(std::make_unique<Impl>(reduced, frozen)) {}
LocalSearch::~LocalSearch() = default;
LocalSearch::LocalSearch(LocalSearch&&) noexcept = default;
LocalSearch& LocalSearch::operator=(LocalSearch&&) noexcept = default;

SearchResult LocalSearch::solve(const Model& start, const SearchConfig& config) { return impl_->run(start, config); }
std::size_t LocalSearch::clause_count() const { return impl_->clauses.size(); }
std::size_t LocalSearch::variable_count() const { return impl_->vars.size() + impl_->bools.size(); }

SearchResult local_search_solve(const ReducedFormula& reduced, const Model* warm, const SearchConfig& config,
                                const std::vector<ArithId>& frozen) {
  LocalSearch search(reduced, frozen);
  Model start = warm ? *warm : Model(reduced.formula.vars.arith_count(), reduced.formula.vars.bool_count());
  return search.solve(start, config);
}

Model warm_start_from(const Model& previous, const std::vector<std::pair<ArithId, std::int64_t>>& updates) {
  Model m = previous;
  for (const auto& [v, value] : updates) {
    if (v.index >= m.arith_size()) m.resize(v.index + 1, m.bool_size());
    m.set(v, value);
  }
  return m;
}

SolverResult LocalBackend::solve(const SolverRequest& req) {
  if (req.maxsmt || req.objective) throw Error("local backend answers satisfiability only");
  return CheckingBackend::solve(req);
}

SolverResult LocalBackend::check(const Formula& f, const std::vector<Clause>& extra,
                                 const std::vector<Literal>& assumptions, bool) {
  SolverResult r;
  r.stats.calls = 1;
  Formula g = f;
  g.soft.clear();
  for (const auto& c : extra) g.hard.push_back(c);
  BoolAssignment fixed;
  for (const auto& a : assumptions) fixed[a.bool_var()] = a.positive();
  try {
    SimplifyResult simplified = boolean_simplify(g, fixed, false);
    ReducedFormula reduced = unit_equation_elimination(simplified.residual);
    Model start(g.vars.arith_count(), g.vars.bool_count());
    for (std::uint32_t i = 0; i < simplified.values.size(); ++i) {
      if (simplified.values[i]) start.set(BoolId{i}, *simplified.values[i]);
    }
    SearchResult s = local_search_solve(reduced, &start, config_);
    r.stats.steps = s.steps;
    if (s.status == Status::sat) {
      for (std::uint32_t i = 0; i < simplified.values.size(); ++i) {
        if (simplified.values[i]) s.model.set(BoolId{i}, *simplified.values[i]);
      }
      r.status = Status::sat;
      r.model = std::move(s.model);
    } else {
      r.diagnostic = "local search budget exhausted with " + std::to_string(s.best_falsified) + " falsified clauses";
    }
  } catch (const ConflictError& e) {
    r.status = Status::unsat;
    r.core = e.origins();
  }
  return r;
}

}  // namespace reflow

namespace reflow {

ParametricSolver::ParametricSolver(const Formula& f, const BoolAssignment& fixed, std::vector<ArithId> params)
    : params_(std::move(params)) {
  auto t0 = std::chrono::steady_clock::now();
  clauses_before_ = f.hard.size();
  Formula g;
  g.vars = f.vars;
  g.hard = f.hard;
  SimplifyResult simplified = boolean_simplify(g, fixed, false);
  clauses_simplified_ = simplified.residual.hard.size();
  bools_ = std::move(simplified.values);
  reduced_ = unit_equation_elimination(simplified.residual, {.protected_vars = params_});
  search_ = std::make_unique<LocalSearch>(reduced_, params_);
  prepare_millis_ = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

SearchResult ParametricSolver::solve(const std::vector<std::pair<ArithId, std::int64_t>>& values, const Model* warm,
                                     const SearchConfig& config) {
  const auto& vars = reduced_.formula.vars;
  Model start = warm ? *warm : Model(vars.arith_count(), vars.bool_count());
  start.resize(vars.arith_count(), vars.bool_count());
  for (const auto& [v, value] : values) start.set(v, value);
  for (std::uint32_t i = 0; i < bools_.size(); ++i) {
    if (bools_[i]) start.set(BoolId{i}, *bools_[i]);
  }
  SearchResult s = search_->solve(start, config);
  if (s.status == Status::sat) {
    for (std::uint32_t i = 0; i < bools_.size(); ++i) {
      if (bools_[i]) s.model.set(BoolId{i}, *bools_[i]);
    }
  }
  return s;
}

}  // namespace reflow
