#include <algorithm>
#include <chrono>

#include "reflow/solvers.hpp"

namespace reflow {

std::string_view status_name(Status s) {
  switch (s) {
    case Status::sat: return "sat";
    case Status::unsat: return "unsat";
    default: return "unknown";
  }
}

std::int64_t soft_weight(const std::vector<SoftLiteral>& softs, const Model& m) {
  std::int64_t total = 0;
  for (const auto& s : softs) {
    auto v = m.get(s.var);
    if (v && *v == s.positive) total += s.weight;
  }
  return total;
}

Model restrict_model(const Model& m, std::size_t arith, std::size_t bools) {
  Model out(arith, bools);
  for (std::uint32_t i = 0; i < arith && i < m.arith_size(); ++i) {
    if (auto v = m.get(ArithId{i})) out.set(ArithId{i}, *v);
  }
  for (std::uint32_t i = 0; i < bools && i < m.bool_size(); ++i) {
    if (auto v = m.get(BoolId{i})) out.set(BoolId{i}, *v);
  }
  return out;
}

bool satisfies(const Formula& f, const std::vector<Clause>& extra, const Model& m) {
  for (const auto& c : f.hard) {
    if (!eval_clause(c, m, &f.vars)) return false;
  }
  for (const auto& c : extra) {
    if (!eval_clause(c, m, &f.vars)) return false;
  }
  return true;
}

std::int64_t soft_upper_bound(const Formula& f) {
  const auto& softs = f.soft;
  const std::size_t n = softs.size();
  std::vector<bool> dead(n, false);
  std::vector<std::uint64_t> conflicts(n, 0);
  auto soft_index = [&](const Literal& l) -> int {
    // index of a soft whose literal is the negation of l
    if (!l.is_bool()) return -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (softs[i].var == l.bool_var() && softs[i].positive != l.positive()) return static_cast<int>(i);
    }
    return -1;
  };
  for (const auto& c : f.hard) {
    if (c.literals.size() == 1) {
      int i = soft_index(c.literals[0]);
      if (i >= 0) dead[i] = true;
    } else if (c.literals.size() == 2) {
      int i = soft_index(c.literals[0]);
      int j = soft_index(c.literals[1]);
      if (i >= 0 && j >= 0 && i != j && n <= 64) {
        conflicts[i] |= std::uint64_t{1} << j;
        conflicts[j] |= std::uint64_t{1} << i;
      }
    }
  }
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!dead[i]) total += softs[i].weight;
  }
  if (n > 22) return total;
  // Exact maximum-weight independent set by enumeration.
  std::int64_t best = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::int64_t w = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      if (dead[i] || (conflicts[i] & mask)) ok = false;
      w += softs[i].weight;
    }
    if (ok) best = std::max(best, w);
  }
  return best;
}

WeightEncoding encode_soft_weights(const Formula& f) {
  WeightEncoding enc;
  enc.formula = f;
  for (std::size_t i = 0; i < f.soft.size(); ++i) {
    const auto& s = f.soft[i];
    std::string name = "soft#" + std::to_string(i) + "#" + f.vars.boolean(s.var).name;
    ArithId t = enc.formula.vars.add_arith(ArithVar{name, 0, 1, Axis::none, VarRole::other, no_owner});
    enc.indicators.push_back(t);
    // soft literal ⇔ t = 1
    enc.formula.add({lit(s.var, !s.positive), eq(t, 1)}, "probe:weight");
    enc.formula.add({lit(s.var, s.positive), eq(t, 0)}, "probe:weight");
  }
  return enc;
}

Clause weight_at_least(const WeightEncoding& enc, const std::vector<SoftLiteral>& softs, std::int64_t k) {
  LinearExpr sum;
  for (std::size_t i = 0; i < softs.size(); ++i) sum += LinearExpr(enc.indicators[i]) * Rational(static_cast<long>(softs[i].weight));
  auto c = make_clause({ge(sum, k)}, "probe:weight");
  if (!c) throw Error("weight bound folded to true");
  return *c;
}

namespace {

Clause bound_clause(ArithId v, Cmp cmp, std::int64_t k) {
  auto c = make_clause({compare(LinearExpr(v), cmp, LinearExpr(k))}, "probe:objective");
  return *c;
}

}  // namespace

SolverResult CheckingBackend::solve(const SolverRequest& req) {
  if (!req.formula) throw Error("solver request without formula");
  auto start = std::chrono::steady_clock::now();
  SolverResult r;
  if (req.maxsmt && req.objective) throw Error("objective and maxsmt cannot be combined");
  if (req.maxsmt) {
    r = maxsmt(req);
  } else if (req.objective) {
    r = optimize(req);
  } else {
    r = check(*req.formula, req.extra, req.assumptions, req.want_core);
    r.stats.calls = std::max<std::uint64_t>(r.stats.calls, 1);
  }
  r.stats.backend = name();
  r.stats.millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SolverResult CheckingBackend::optimize(const SolverRequest& req) {
  const Formula& f = *req.formula;
  const ArithId var = req.objective->var;
  const auto& info = f.vars.arith(var);
  const bool maximize = req.objective->direction == Direction::maximize;
  const std::int64_t lo = info.lower.value_or(-req.search_limit);
  const std::int64_t hi = info.upper.value_or(req.search_limit);

  std::vector<Clause> extra = req.extra;
  if (!info.lower) extra.push_back(bound_clause(var, Cmp::ge, lo));
  if (!info.upper) extra.push_back(bound_clause(var, Cmp::le, hi));

  std::uint64_t calls = 1;
  SolverResult first = check(f, extra, req.assumptions, req.want_core);
  if (first.status != Status::sat) {
    first.stats.calls = calls;
    return first;
  }
  Model best_model = *first.model;
  std::int64_t best = *best_model.get(var);
  std::int64_t a = maximize ? best + 1 : lo;
  std::int64_t b = maximize ? hi : best - 1;
  // probe both ends first: layout optima usually sit on a bound or on the
  // first model
  int probes = 0;
  while (a <= b) {
    std::int64_t mid = a + (b - a) / 2;
    if (probes < 2 && b - a > 2) mid = (probes == 0) == maximize ? b : a;
    ++probes;
    std::vector<Clause> probe = extra;
    probe.push_back(bound_clause(var, maximize ? Cmp::ge : Cmp::le, mid));
    SolverResult r = check(f, probe, req.assumptions, false);
    ++calls;
    if (r.status == Status::unknown) {
      r.stats.calls = calls;
      r.diagnostic = "objective search interrupted: " + r.diagnostic;
      return r;
    }
    if (r.status == Status::sat) {
      best_model = *r.model;
      best = *best_model.get(var);
      if (maximize) {
        a = best + 1;
      } else {
        b = best - 1;
      }
    } else if (maximize) {
      b = mid - 1;
    } else {
      a = mid + 1;
    }
  }
  SolverResult out;
  out.status = Status::sat;
  out.model = std::move(best_model);
  out.optimum = best;
  out.capped = maximize ? (!info.upper && best == hi) : (!info.lower && best == lo);
  out.stats.calls = calls;
  return out;
}

SolverResult CheckingBackend::maxsmt(const SolverRequest& req) {
  const Formula& f = *req.formula;
  WeightEncoding enc = encode_soft_weights(f);
  const std::int64_t upper = soft_upper_bound(f);

  std::uint64_t calls = 1;
  SolverResult r = check(enc.formula, req.extra, req.assumptions, req.want_core);
  if (r.status != Status::sat) {
    r.stats.calls = calls;
    return r;
  }
  Model best_model = *r.model;
  std::int64_t best = soft_weight(f.soft, best_model);
  while (best < upper) {
    std::vector<Clause> extra = req.extra;
    extra.push_back(weight_at_least(enc, f.soft, best + 1));
    SolverResult next = check(enc.formula, extra, req.assumptions, false);
    ++calls;
    if (next.status == Status::unknown) {
      next.stats.calls = calls;
      next.diagnostic = "maxsmt search interrupted: " + next.diagnostic;
      return next;
    }
    if (next.status == Status::unsat) break;
    best_model = *next.model;
    best = soft_weight(f.soft, best_model);
  }
  SolverResult out;
  out.status = Status::sat;
  out.model = restrict_model(best_model, f.vars.arith_count(), f.vars.bool_count());
  out.soft_weight = best;
  out.stats.calls = calls;
  return out;
}

namespace {

/// Small instances go to the oracle; whatever exceeds its limits goes to the
/// external solver.
class HybridBackend final : public Backend {
 public:
  explicit HybridBackend(const ExternalConfig& config)
      : oracle_(OracleBackend::Limits{.max_nodes = 20'000, .max_soft = 12}), external_(config) {}
  SolverResult solve(const SolverRequest& req) override {
    if (req.formula->hard.size() + req.extra.size() > kOracleClauses) return external(req);
    try {
      SolverResult r = oracle_.solve(req);
      r.stats.backend = "oracle";
      return r;
    } catch (const LimitError&) {
      return external(req);
    }
  }
  std::string name() const override { return "hybrid"; }

 private:
  static constexpr std::size_t kOracleClauses = 120;

  SolverResult external(const SolverRequest& req) {
    SolverResult r = external_.solve(req);
    r.stats.backend = "external";
    return r;
  }

  OracleBackend oracle_;
  ExternalBackend external_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const std::string& name, const ExternalConfig& config) {
  if (name == "oracle") return std::make_unique<OracleBackend>();
  if (name == "hybrid") return std::make_unique<HybridBackend>(config);
  if (name == "external") return std::make_unique<ExternalBackend>(config);
  throw Error("unknown backend '" + name + "'");
}

}  // namespace reflow
