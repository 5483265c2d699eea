#include <algorithm>
#include <numeric>

#include "reflow/preprocess.hpp"

namespace reflow {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

std::string property_name(const VarRegistry& vars, ArithId p) { return vars.arith(p).name; }

SolverResult must(Backend& backend, const SolverRequest& req, const std::string& what) {
  SolverResult r = backend.solve(req);
  if (r.status == Status::unknown) {
    throw SolverError(what + ": backend returned unknown" + (r.diagnostic.empty() ? "" : " (" + r.diagnostic + ")"));
  }
  return r;
}

Clause fix_clause(ArithId p, std::int64_t v, const std::string& origin) { return *make_clause({eq(p, v)}, origin); }

class Hardener {
 public:
  Hardener(const Formula& f, ArithId p, Backend& backend, const HardeningOptions& options)
      : p_(p), backend_(backend) {
    g_.vars = f.vars;
    g_.hard = f.hard;
    g_.hard.insert(g_.hard.end(), options.extra.begin(), options.extra.end());
    g_.soft = options.related ? *options.related : related_softs(f, p);
  }

  IntervalTable start() {
    IntervalTable t;
    t.property = p_;
    t.related = g_.soft;
    t.max_val = bound(Direction::maximize);
    t.min_val = bound(Direction::minimize);
    return t;
  }

  void run(IntervalTable& t, std::int64_t upper) {
    const std::string name = property_name(g_.vars, p_);
    while (upper >= t.min_val) {
      IntervalRow row;
      row.hi = upper;
      if (g_.soft.empty()) {
        row.lo = t.min_val;
      } else {
        SolverRequest req = request();
        req.maxsmt = true;
        req.extra = {fix_clause(p_, upper, "probe")};
        SolverResult best = solve_or_partial(req, t, "MaxSMT at " + name + " = " + std::to_string(upper));
        if (best.status != Status::sat) {
          SolverRequest core = request();
          core.extra = req.extra;
          core.want_core = true;
          SolverResult c = backend_.solve(core);
          std::erase(c.core, std::string("probe"));
          throw ConflictError("hard constraints are unsatisfiable at " + name + " = " + std::to_string(upper), c.core);
        }
        std::vector<Literal> alpha;
        for (const auto& s : g_.soft) {
          bool value = best.model->get(s.var).value_or(false);
          row.assignment[s.var] = value;
          alpha.push_back(Literal::boolean(s.var, value));
        }
        row.weight = soft_weight(g_.soft, *best.model);

        SolverRequest low = request();
        low.assumptions = alpha;
        low.extra = {*make_clause({le(p_, upper)}, "probe")};
        low.objective = Objective{p_, Direction::minimize};
        row.lo = *solve_or_partial(low, t, "minimising " + name + " under the assignment").optimum;

        // a strictly heavier assignment feasible inside the row cuts it
        if (row.lo < upper) {
          if (!encoding_) encoding_ = encode_soft_weights(g_);
          SolverRequest heavier;
          heavier.formula = &encoding_->formula;
          heavier.extra = {weight_at_least(*encoding_, g_.soft, row.weight + 1),
                           *make_clause({ge(p_, row.lo)}, "probe"), *make_clause({le(p_, upper - 1)}, "probe")};
          heavier.objective = Objective{p_, Direction::maximize};
          SolverResult h = solve_or_partial(heavier, t, "checking heavier assignments below " + std::to_string(upper));
          if (h.status == Status::sat) row.lo = *h.optimum + 1;
        }
      }
      t.rows.push_back(row);
      upper = row.lo - 1;
    }
  }

 private:
  SolverRequest request() const {
    SolverRequest r;
    r.formula = &g_;
    return r;
  }

  std::int64_t bound(Direction d) {
    SolverRequest req = request();
    req.objective = Objective{p_, d};
    SolverResult r = must(backend_, req, "bounding " + property_name(g_.vars, p_));
    if (r.status == Status::unsat) {
      SolverRequest core = request();
      core.want_core = true;
      SolverResult c = backend_.solve(core);
      throw ConflictError("empty range: hard constraints are unsatisfiable", c.core);
    }
    return *r.optimum;
  }

  SolverResult solve_or_partial(const SolverRequest& req, const IntervalTable& t, const std::string& what) {
    SolverResult r = backend_.solve(req);
    if (r.status == Status::unknown) {
      std::string rows;
      for (const auto& row : t.rows) rows += " [" + std::to_string(row.lo) + "," + std::to_string(row.hi) + "]";
      throw SolverError(what + ": backend returned unknown; partial table:" + (rows.empty() ? " (none)" : rows));
    }
    return r;
  }

  Formula g_;
  ArithId p_;
  Backend& backend_;
  std::optional<WeightEncoding> encoding_;
};

}  // namespace

std::optional<std::size_t> IntervalTable::row_of(std::int64_t v) const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].lo <= v && v <= rows[i].hi) return i;
  }
  return std::nullopt;
}

bool IntervalTable::tiles() const {
  if (rows.empty() || rows.front().hi != max_val || rows.back().lo != min_val) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].lo > rows[i].hi) return false;
    if (i + 1 < rows.size() && rows[i + 1].hi != rows[i].lo - 1) return false;
  }
  return true;
}

std::vector<Clause> IntervalTable::relation(const VarRegistry& vars) const {
  const std::string origin = "relation:" + vars.arith(property).name;
  std::vector<Clause> out;
  auto push = [&](const std::vector<LitOrConst>& lits) {
    if (auto c = make_clause(lits, origin)) out.push_back(std::move(*c));
  };
  push({ge(property, min_val)});
  push({le(property, max_val)});
  for (const auto& row : rows) {
    for (const auto& [b, value] : row.assignment) push({lt(property, row.lo), gt(property, row.hi), lit(b, value)});
  }
  return out;
}

std::vector<SoftLiteral> related_softs(const Formula& f, ArithId p) {
  const Axis axis = f.vars.arith(p).axis;
  const std::size_t na = f.vars.arith_count();
  UnionFind uf(na + f.vars.bool_count());
  auto keep = [&](ArithId v) {
    Axis a = f.vars.arith(v).axis;
    return a == axis || a == Axis::none || axis == Axis::none;
  };
  for (const auto& c : f.hard) {
    std::optional<std::size_t> first;
    auto link = [&](std::size_t node) {
      if (first) uf.unite(*first, node);
      else first = node;
    };
    for (const auto& l : c.literals) {
      if (l.is_bool()) {
        link(na + l.bool_var().index);
        continue;
      }
      for (const auto& t : l.atom().terms()) {
        if (keep(t.var)) link(t.var.index);
      }
    }
  }
  std::vector<SoftLiteral> out;
  const std::size_t root = uf.find(p.index);
  for (const auto& s : f.soft) {
    if (uf.find(na + s.var.index) == root) out.push_back(s);
  }
  return out;
}

IntervalTable soft_constraints_hardening(const Formula& f, ArithId p, Backend& backend,
                                         const HardeningOptions& options) {
  Hardener h(f, p, backend, options);
  IntervalTable t = h.start();
  h.run(t, t.max_val);
  return t;
}

IntervalTable resume_hardening(const Formula& f, ArithId p, Backend& backend, const IntervalTable& prefix,
                               std::int64_t upper, const HardeningOptions& options) {
  HardeningOptions opts = options;
  if (!opts.related) opts.related = prefix.related;
  Hardener h(f, p, backend, opts);
  IntervalTable t = prefix;
  t.rows.clear();
  for (const auto& row : prefix.rows) {
    if (row.lo > upper) {
      t.rows.push_back(row);
    } else if (row.hi > upper) {
      IntervalRow cut = row;
      cut.lo = upper + 1;
      t.rows.push_back(cut);
    }
  }
  h.run(t, upper);
  return t;
}

}  // namespace reflow
