#include <algorithm>
#include <map>
#include <memory>

#include "reflow/preview.hpp"
#include "reflow/text.hpp"

namespace reflow {

namespace {

class Checker {
 public:
  Checker(Formula f_max, ArithId p, IntervalTable table, Backend& backend, const SearchConfig& search)
      : f_(std::move(f_max)), p_(p), table_(std::move(table)), backend_(backend), search_(search) {
    f_.soft.clear();
  }

  /// hard ∧ C_relation ∧ (p = v)
  bool feasible(std::int64_t v) {
    ++checks;
    auto row = table_.row_of(v);
    if (!row) return false;
    auto& slot = solvers_[*row];
    if (!slot.tried) {
      slot.tried = true;
      try {
        slot.solver = std::make_unique<ParametricSolver>(f_, table_.rows[*row].assignment, std::vector<ArithId>{p_});
      } catch (const ConflictError&) {
        slot.solver.reset();
      }
    }
    if (!slot.solver) return false;
    SearchResult s = slot.solver->solve({{p_, v}}, warm_ ? &*warm_ : nullptr, search_);
    if (s.status == Status::sat) {
      warm_ = std::move(s.model);
      return true;
    }
    ++complete_checks;
    SolverRequest req;
    req.formula = &f_;
    req.extra = {probe(v)};
    for (const auto& [b, value] : table_.rows[*row].assignment) req.assumptions.push_back(Literal::boolean(b, value));
    SolverResult r = backend_.solve(req);
    if (r.status == Status::unknown) {
      throw SolverError("preview at " + f_.vars.arith(p_).name + " = " + std::to_string(v) + ": backend returned unknown");
    }
    return r.status == Status::sat;
  }

  /// F_max.hard ∧ (p = v); returns the core when unsat.
  std::optional<std::vector<std::string>> hard_core(std::int64_t v) {
    SolverRequest req;
    req.formula = &f_;
    req.extra = {probe(v)};
    req.want_core = true;
    SolverResult r = backend_.solve(req);
    if (r.status == Status::unknown) {
      throw SolverError("preview at " + f_.vars.arith(p_).name + " = " + std::to_string(v) + ": backend returned unknown");
    }
    if (r.status == Status::sat) return std::nullopt;
    std::erase(r.core, std::string("probe"));
    return r.core;
  }

  Clause repair(std::int64_t v, const BoolAssignment& alpha, Formula& f_max) {
    std::vector<LitOrConst> lits;
    for (const auto& [b, value] : alpha) lits.push_back(lit(b, !value));
    lits.push_back(gt(p_, v));
    Clause c = *make_clause(lits, "repair:" + f_.vars.arith(p_).name + "@" + std::to_string(v));
    f_.hard.push_back(c);
    f_max.hard.push_back(c);
    table_ = resume_hardening(f_max, p_, backend_, table_, v);
    solvers_.clear();
    return c;
  }

  const IntervalTable& table() const { return table_; }
  const Formula& formula() const { return f_; }

  std::uint64_t checks = 0;
  std::uint64_t complete_checks = 0;

 private:
  Clause probe(std::int64_t v) const { return *make_clause({eq(p_, v)}, "probe"); }

  struct Slot {
    bool tried = false;
    std::unique_ptr<ParametricSolver> solver;
  };

  Formula f_;
  ArithId p_;
  IntervalTable table_;
  Backend& backend_;
  SearchConfig search_;
  std::map<std::size_t, Slot> solvers_;
  std::optional<Model> warm_;
};

std::pair<std::string, std::string> split_origin(const std::string& origin) {
  auto colon = origin.find(':');
  if (colon == std::string::npos) return {origin, ""};
  return {origin.substr(0, colon), origin.substr(colon + 1)};
}

}  // namespace

std::string_view preview_status_name(PreviewStatus s) {
  switch (s) {
    case PreviewStatus::clean: return "clean";
    case PreviewStatus::repaired: return "repaired";
    case PreviewStatus::conflict: return "conflict";
  }
  return "?";
}

std::vector<ConflictGroup> group_conflicts(const std::vector<std::string>& core, const Formula& f) {
  if (core.empty()) throw Error("conflict report needs a non-empty core");
  std::vector<ConflictGroup> groups;
  for (const auto& origin : core) {
    if (std::any_of(groups.begin(), groups.end(), [&](const ConflictGroup& g) { return g.origin == origin; })) continue;
    ConflictGroup g;
    g.origin = origin;
    std::tie(g.kind, g.widget) = split_origin(origin);
    for (const auto& c : f.hard) {
      if (c.origin == origin) g.clauses.push_back(format_clause(c, f.vars));
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::string report_conflicts(const std::vector<std::string>& core, const Formula& f) {
  std::string out = "conflicting hard constraints:\n";
  for (const auto& g : group_conflicts(core, f)) {
    out += "  [" + g.kind + "] " + (g.widget.empty() ? g.origin : g.widget) + "\n";
    for (const auto& c : g.clauses) out += "      " + c + "\n";
  }
  return out;
}

PreviewResult preview_sweep(const Formula& f_max, ArithId p, const IntervalTable& table, Backend& backend,
                            const PreviewOptions& options) {
  if (options.stride < 1) throw Error("preview stride must be positive");
  Formula fm = f_max;
  Checker checker(f_max, p, table, backend, options.search);
  PreviewResult out;
  const std::int64_t from = options.from.value_or(table.max_val);
  const std::int64_t to = options.to.value_or(table.min_val);

  std::optional<std::int64_t> last_ok;
  std::int64_t curr = from;
  while (curr >= to) {
    if (checker.feasible(curr)) {
      last_ok = curr;
      if (curr == to) break;
      curr = std::max(curr - options.stride, to);
      continue;
    }
    // narrow a coarse miss down to the highest failing width
    if (options.refine && last_ok && *last_ok - curr > 1) {
      std::int64_t bad = curr, good = *last_ok;
      while (good - bad > 1) {
        std::int64_t mid = bad + (good - bad) / 2;
        if (checker.feasible(mid)) good = mid;
        else bad = mid;
      }
      curr = bad;
    }
    if (auto core = checker.hard_core(curr)) {
      ConflictReport report;
      report.at = curr;
      report.core = *core;
      if (report.core.empty()) report.core.push_back("screen");
      report.groups = group_conflicts(report.core, checker.formula());
      report.text = "at " + f_max.vars.arith(p).name + " = " + std::to_string(curr) + ", " +
                    report_conflicts(report.core, checker.formula());
      out.status = PreviewStatus::conflict;
      out.conflict = std::move(report);
      out.table = checker.table();
      out.checks = checker.checks;
      out.complete_checks = checker.complete_checks;
      return out;
    }
    auto row = checker.table().row_of(curr);
    if (!row || checker.table().rows[*row].assignment.empty()) {
      throw SolverError("preview: width " + std::to_string(curr) + " fails without a soft assignment to repair");
    }
    BoolAssignment alpha = checker.table().rows[*row].assignment;
    out.repairs.push_back(checker.repair(curr, alpha, fm));
    out.repair_log.push_back({curr, alpha});
    out.status = PreviewStatus::repaired;
  }
  out.table = checker.table();
  out.checks = checker.checks;
  out.complete_checks = checker.complete_checks;
  return out;
}

}  // namespace reflow
