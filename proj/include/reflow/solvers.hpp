#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reflow/formula.hpp"

namespace reflow {

enum class Status : std::uint8_t { sat, unsat, unknown };
enum class Direction : std::uint8_t { minimize, maximize };

std::string_view status_name(Status s);

struct Objective {
  ArithId var;
  Direction direction = Direction::minimize;
};

struct SolverRequest {
  const Formula* formula = nullptr;  ///< registry, hard clauses, and softs
  std::vector<Clause> extra;         ///< additional hard clauses
  std::vector<Literal> assumptions;  ///< Boolean literals
  std::optional<Objective> objective;
  bool maxsmt = false;  ///< maximize the weight of formula->soft
  bool want_core = false;
  /// Objective search window used where the variable has no registry bound.
  std::int64_t search_limit = 10000;
};

struct SolverStats {
  double millis = 0;
  std::uint64_t calls = 0;
  std::uint64_t steps = 0;
  std::uint64_t restarts = 0;
  std::string backend;
};

struct SolverResult {
  Status status = Status::unknown;
  std::optional<Model> model;
  std::optional<std::int64_t> optimum;
  bool capped = false;  ///< optimum sits on the search_limit cap
  std::optional<std::int64_t> soft_weight;
  std::vector<std::string> core;  ///< origin tags
  SolverStats stats;
  std::string diagnostic;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual SolverResult solve(const SolverRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Shared driver: objectives by bisection over bound clauses, MaxSMT by LSU.
/// Implementations supply a single satisfiability check.
class CheckingBackend : public Backend {
 public:
  SolverResult solve(const SolverRequest& req) override;

  virtual SolverResult check(const Formula& f, const std::vector<Clause>& extra,
                             const std::vector<Literal>& assumptions, bool want_core) = 0;

 protected:
  virtual SolverResult maxsmt(const SolverRequest& req);
  SolverResult optimize(const SolverRequest& req);
};

/// Exhaustive exact solver for small instances: case split over clause
/// literals with exact-rational simplex pruning and branch-and-bound.
class OracleBackend final : public CheckingBackend {
 public:
  struct Limits {
    std::uint64_t max_nodes = 2'000'000;
    std::uint32_t max_soft = 20;
  };
  OracleBackend() = default;
  explicit OracleBackend(Limits limits) : limits_(limits) {}

  SolverResult check(const Formula& f, const std::vector<Clause>& extra,
                     const std::vector<Literal>& assumptions, bool want_core) override;
  std::string name() const override { return "oracle"; }

 protected:
  /// Enumerates soft subsets by decreasing weight.
  SolverResult maxsmt(const SolverRequest& req) override;

 private:
  Limits limits_;
};

struct ExternalConfig {
  std::string executable;  ///< empty: REFLOW_SOLVER env, then `z3` on PATH
  std::vector<std::string> args{"-in", "-smt2"};
  std::chrono::milliseconds timeout{30000};
  std::string dump_dir;  ///< when set, every script is written here
};

class SolverProcess;

/// Drives an SMT-LIB2 executable over its standard streams.
class ExternalBackend final : public CheckingBackend {
 public:
  explicit ExternalBackend(ExternalConfig config = {});
  ~ExternalBackend() override;

  SolverResult check(const Formula& f, const std::vector<Clause>& extra,
                     const std::vector<Literal>& assumptions, bool want_core) override;
  std::string name() const override { return "external"; }

  /// Resolves the executable per config/env/PATH; empty when not found.
  static std::string locate(const ExternalConfig& config);
  static bool available(const ExternalConfig& config = {});

 private:
  ExternalConfig config_;
  std::unique_ptr<SolverProcess> process_;
  std::uint64_t script_counter_ = 0;
};

/// Builds a backend by name: "oracle", "external" or "hybrid" (oracle first,
/// external past the oracle limits).
std::unique_ptr<Backend> make_backend(const std::string& name, const ExternalConfig& config = {});

// ---- helpers shared by backends and tests ----

std::int64_t soft_weight(const std::vector<SoftLiteral>& softs, const Model& m);

/// Upper bound on achievable soft weight: maximum-weight soft subset that
/// respects hard unit clauses and pairwise at-most-one clauses over softs.
std::int64_t soft_upper_bound(const Formula& f);

/// Registry extended with 0/1 indicators t_i ⇔ soft_i, so weight bounds
/// become linear atoms.
struct WeightEncoding {
  Formula formula;
  std::vector<ArithId> indicators;
};
WeightEncoding encode_soft_weights(const Formula& f);
/// Clause Σ w_i·t_i ≥ k over the encoding's indicators.
Clause weight_at_least(const WeightEncoding& enc, const std::vector<SoftLiteral>& softs, std::int64_t k);

/// Copies the first `arith`/`bools` entries of `m`.
Model restrict_model(const Model& m, std::size_t arith, std::size_t bools);

/// Evaluates `f.hard` plus `extra` under `m`; true when all hold.
bool satisfies(const Formula& f, const std::vector<Clause>& extra, const Model& m);

}  // namespace reflow
