#pragma once

#include <map>
#include <optional>
#include <vector>

#include "reflow/formula.hpp"

namespace reflow {

using BoolAssignment = std::map<BoolId, bool>;

struct SimplifyResult {
  /// Same registry; satisfied clauses dropped, false Boolean literals removed,
  /// softs over assigned variables dropped.
  Formula residual;
  /// Fixed plus inferred values, indexed by BoolId.
  std::vector<std::optional<bool>> values;
  /// Values chosen by pure-literal elimination. These keep the formula
  /// satisfiable but, unlike propagated values, are a choice rather than a
  /// consequence.
  std::vector<bool> chosen;
  std::size_t propagated = 0;

  BoolAssignment inferred() const;
};

/// Unit propagation and pure-literal elimination over Boolean literals, to
/// fixpoint. Soft variables are never chosen as pure literals. Throws
/// ConflictError carrying the origin of the falsified clause.
SimplifyResult boolean_simplify(const Formula& f, const BoolAssignment& fixed, bool pure_literals = true);

/// Equality atoms appearing positively in unit clauses.
std::vector<LinearAtom> collect_unit_equations(const Formula& f);

}  // namespace reflow
