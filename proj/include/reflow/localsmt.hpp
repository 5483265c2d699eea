#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reflow/formula.hpp"
#include "reflow/simplify.hpp"
#include "reflow/solvers.hpp"

namespace reflow {

/// Eliminated variables as affine expressions over surviving variables, plus
/// Boolean values fixed while simplifying.
class EliminationMap {
 public:
  struct Substitution {
    ArithId var;
    LinearExpr expr;
  };

  const std::vector<Substitution>& substitutions() const { return subs_; }
  const BoolAssignment& fixed_bools() const { return bools_; }
  bool eliminated(ArithId v) const { return v.index < mask_.size() && mask_[v.index]; }
  std::size_t size() const { return subs_.size(); }

  /// Writes eliminated variables and fixed Booleans into `m`, which must
  /// assign every surviving variable the expressions mention.
  void extend(Model& m) const;

 private:
  friend class Eliminator;
  std::vector<Substitution> subs_;
  std::vector<bool> mask_;
  BoolAssignment bools_;
};

struct EliminationRound {
  std::vector<ArithId> eliminated;
  std::vector<std::string> new_unit_equations;  ///< canonical texts created by re-simplification
  std::size_t clauses_after = 0;
};

struct ReducedFormula {
  Formula formula;  ///< surviving clauses; registry bounds are the tightened domains
  EliminationMap map;
  std::vector<EliminationRound> trace;
  std::size_t clauses_before = 0;
};

struct EliminationOptions {
  std::vector<ArithId> protected_vars;  ///< never eliminated (e.g. the screen width)
};

/// Fixpoint of: collect unit equations, exact Gauss-Jordan, substitute solved
/// forms x = k and y = k·x + b (integral k, b), re-simplify. Throws
/// ConflictError with contributing origins on inconsistency.
ReducedFormula unit_equation_elimination(const Formula& f, const EliminationOptions& options = {});

struct SearchConfig {
  std::uint64_t max_steps = 2'000'000;
  double budget_ms = 10;
  std::uint32_t tabu_tenure = 3;
  double walk_probability = 0.01;
  std::uint64_t seed = 1;
};

struct SearchResult {
  Status status = Status::unknown;  ///< sat or unknown, never unsat
  Model model;                      ///< full registry; valid when sat
  std::uint64_t steps = 0;
  std::uint64_t restarts = 0;
  std::size_t best_falsified = 0;
  double millis = 0;
};

/// Compiled local-search instance over a reduced formula. Frozen variables
/// (parameters such as the screen width) keep the value supplied at solve
/// time and are never moved.
class LocalSearch {
 public:
  LocalSearch(const ReducedFormula& reduced, std::vector<ArithId> frozen = {});
  ~LocalSearch();
  LocalSearch(LocalSearch&&) noexcept;
  LocalSearch& operator=(LocalSearch&&) noexcept;

  /// `start` seeds surviving variables (warm start); missing values start at
  /// the domain lower bound (or 0). The returned model is back-substituted.
  SearchResult solve(const Model& start, const SearchConfig& config);

  std::size_t clause_count() const;
  std::size_t variable_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SearchResult local_search_solve(const ReducedFormula& reduced, const Model* warm, const SearchConfig& config,
                                const std::vector<ArithId>& frozen = {});

/// `previous` with the given fixed-value updates applied.
Model warm_start_from(const Model& previous, const std::vector<std::pair<ArithId, std::int64_t>>& updates);

/// Boolean reasoning, elimination and a compiled search instance for one
/// fixed Boolean assignment, reused across values of the parameters.
class ParametricSolver {
 public:
  /// Throws ConflictError when the formula is unsat for every parameter value.
  ParametricSolver(const Formula& f, const BoolAssignment& fixed, std::vector<ArithId> params);

  /// Parameters take `values`; everything else starts from `warm` when given.
  SearchResult solve(const std::vector<std::pair<ArithId, std::int64_t>>& values, const Model* warm,
                     const SearchConfig& config);

  const ReducedFormula& reduced() const { return reduced_; }
  std::size_t clauses_before() const { return clauses_before_; }
  std::size_t clauses_after_simplify() const { return clauses_simplified_; }
  double prepare_millis() const { return prepare_millis_; }

 private:
  std::vector<ArithId> params_;
  std::vector<std::optional<bool>> bools_;
  ReducedFormula reduced_;
  std::unique_ptr<LocalSearch> search_;
  std::size_t clauses_before_ = 0;
  std::size_t clauses_simplified_ = 0;
  double prepare_millis_ = 0;
};

/// Satisfiability-only backend: elimination then local search from a cold
/// start. Reports unknown when the budget runs out; unsat only when
/// elimination proves it.
class LocalBackend final : public CheckingBackend {
 public:
  explicit LocalBackend(SearchConfig config = {}) : config_(config) {}
  SolverResult solve(const SolverRequest& req) override;
  SolverResult check(const Formula& f, const std::vector<Clause>& extra,
                     const std::vector<Literal>& assumptions, bool want_core) override;
  std::string name() const override { return "local"; }

 private:
  SearchConfig config_;
};

}  // namespace reflow
