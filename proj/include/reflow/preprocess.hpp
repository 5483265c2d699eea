#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "reflow/formula.hpp"
#include "reflow/layout.hpp"
#include "reflow/simplify.hpp"
#include "reflow/solvers.hpp"

namespace reflow {

struct IntervalRow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  BoolAssignment assignment;  ///< values of the related softs
  std::int64_t weight = 0;
  friend bool operator==(const IntervalRow&, const IntervalRow&) = default;
};

/// Partition of a size property's range; rows are stored in descending order.
struct IntervalTable {
  ArithId property;
  std::int64_t min_val = 0;
  std::int64_t max_val = 0;
  std::vector<SoftLiteral> related;
  std::vector<IntervalRow> rows;

  std::optional<std::size_t> row_of(std::int64_t v) const;
  /// Rows cover [min_val, max_val] exactly, descending, no gaps or overlaps.
  bool tiles() const;
  /// C_relation: the range bound, and for each row
  /// (lo ≤ p ≤ hi) → assignment, tagged "relation:<property>".
  std::vector<Clause> relation(const VarRegistry& vars) const;

  friend bool operator==(const IntervalTable&, const IntervalTable&) = default;
};

/// Softs sharing a connected component with `p` in the variable-clause
/// incidence graph restricted to p's axis (Booleans connect both axes).
std::vector<SoftLiteral> related_softs(const Formula& f, ArithId p);

struct HardeningOptions {
  /// Restricts the table to these softs; defaults to related_softs(f, p).
  std::optional<std::vector<SoftLiteral>> related;
  std::vector<Clause> extra;  ///< conjoined to f.hard
};

/// Descending interval loop over p: MaxSMT at the current upper bound fixes
/// the assignment, OMT minimisation under it gives the lower bound.
IntervalTable soft_constraints_hardening(const Formula& f, ArithId p, Backend& backend,
                                         const HardeningOptions& options = {});

/// Re-runs the loop from `upper` down, keeping rows of `prefix` above it.
IntervalTable resume_hardening(const Formula& f, ArithId p, Backend& backend, const IntervalTable& prefix,
                               std::int64_t upper, const HardeningOptions& options = {});

struct IndependenceReport {
  std::string widget;
  bool closed = false;           ///< clauses touching the subtree stay inside it
  std::size_t clauses = 0;
  bool within_threshold = false;
  bool axis_separated = false;   ///< no width/height coupling after propagation
  bool translation_invariant = false;
  bool softs_attributed = false; ///< every inner soft relates to exactly one of w, h
  bool qualifies() const {
    return closed && within_threshold && axis_separated && translation_invariant && softs_attributed;
  }
};

/// Evaluates every non-root container; the result lists all candidates.
std::vector<IndependenceReport> independence_reports(const Formula& f, const CompiledLayout& layout,
                                                     std::size_t threshold);

/// Outermost qualifying widgets, in widget order. Excluded widgets do not
/// qualify, so qualifying widgets nested in them can surface.
std::vector<std::string> detect_independent_widgets(const Formula& f, const CompiledLayout& layout,
                                                     std::size_t threshold, const std::set<std::string>& exclude = {});

struct IndependentSlice {
  std::string widget;
  std::int32_t index = 0;
  /// F_sub plus [w]_v and the (0, 0) anchor; softs are the inner softs.
  Formula formula;
  IntervalTable width;
  IntervalTable height;
  std::size_t clause_count = 0;  ///< |F_sub|

  /// C_inner = F_sub.hard ∧ C_width ∧ C_height.
  Formula inner() const;
};

struct Extraction {
  Formula outer;  ///< remaining clauses, widget size ranges, remaining softs
  std::vector<IndependentSlice> slices;
};

/// Splits F_max into the outer formula and per-widget slices. Each slice's
/// size range is clamped to what the whole formula allows. Slice tables are
/// hardened but not yet previewed. Slices found in `reuse` are taken as is.
Extraction extract_independent_widgets(const Formula& f, const CompiledLayout& layout, Backend& backend,
                                       std::size_t threshold, const std::set<std::string>& exclude = {},
                                       const std::map<std::string, IndependentSlice>& reuse = {});

/// Clauses of `f` touching any variable owned by the subtree of `w`.
std::vector<std::size_t> sub_clauses(const Formula& f, const CompiledLayout& layout, std::int32_t w);

struct BundleWidget {
  std::string id;
  ContainerKind kind = ContainerKind::leaf;
  std::vector<std::string> kids;
  std::optional<std::int32_t> slice;  ///< slice index when inside an extracted subtree
  friend bool operator==(const BundleWidget&, const BundleWidget&) = default;
};

struct BundleSlice {
  std::string widget;
  std::vector<Clause> hard;
  IntervalTable width;
  IntervalTable height;
  std::size_t clause_count = 0;
  friend bool operator==(const BundleSlice&, const BundleSlice&) = default;
};

struct DeployBundle {
  static constexpr int format_version = 1;
  std::string tool_version;
  std::string config_hash;
  VarRegistry vars;
  std::vector<BundleWidget> widgets;
  std::string root;
  ArithId screen_width;
  std::vector<Clause> outer;
  IntervalTable table;
  std::vector<BundleSlice> slices;

  std::int32_t widget_index(std::string_view id) const;
};

struct BundleInputs {
  const CompiledLayout* layout = nullptr;
  const LayoutSpec* spec = nullptr;
  const Formula* outer = nullptr;
  const IntervalTable* table = nullptr;
  std::vector<IndependentSlice> slices;
};

/// Throws BundleError on a dangling variable reference.
DeployBundle build_bundle(const BundleInputs& in);
std::string serialize_bundle(const DeployBundle& b);
/// Throws BundleError naming the offending section.
DeployBundle parse_bundle(std::string_view text);
DeployBundle load_bundle_file(const std::string& path);
void save_bundle_file(const DeployBundle& b, const std::string& path);

/// FNV-1a over the canonical layout text and config.
std::string config_hash(const LayoutSpec& spec);

}  // namespace reflow
