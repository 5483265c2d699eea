#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reflow/localsmt.hpp"
#include "reflow/preprocess.hpp"

namespace reflow {

enum class PreviewStatus : std::uint8_t { clean, repaired, conflict };

std::string_view preview_status_name(PreviewStatus s);

struct PreviewOptions {
  std::int64_t stride = 1;
  /// With stride > 1, bisect back to the first failing width after a miss.
  bool refine = true;
  /// Sweep bounds; defaults to the table's [min_val, max_val].
  std::optional<std::int64_t> from, to;
  SearchConfig search{.budget_ms = 50};
};

struct RepairRecord {
  std::int64_t at = 0;  ///< width where the assignment first failed
  BoolAssignment assignment;
};

struct ConflictGroup {
  std::string origin;
  std::string kind;    ///< container kind, "user", "pref", ...
  std::string widget;  ///< widget or constraint id
  std::vector<std::string> clauses;
};

struct ConflictReport {
  std::int64_t at = 0;
  std::vector<std::string> core;
  std::vector<ConflictGroup> groups;
  std::string text;
};

struct PreviewResult {
  PreviewStatus status = PreviewStatus::clean;
  IntervalTable table;
  std::vector<Clause> repairs;  ///< implications conjoined to F_max
  std::vector<RepairRecord> repair_log;
  std::optional<ConflictReport> conflict;
  std::uint64_t checks = 0;
  std::uint64_t complete_checks = 0;  ///< checks the local engine could not settle
};

/// Sweeps p from the top of the range down, checking hard ∧ C_relation ∧
/// (p = v). A failing width either exposes a hard conflict (reported with a
/// core) or a discontinuous assignment, which is excluded below v and the
/// table re-hardened from v down.
PreviewResult preview_sweep(const Formula& f_max, ArithId p, const IntervalTable& table, Backend& backend,
                            const PreviewOptions& options = {});

/// Groups core origins by container; throws Error on an empty core.
std::vector<ConflictGroup> group_conflicts(const std::vector<std::string>& core, const Formula& f);
std::string report_conflicts(const std::vector<std::string>& core, const Formula& f);

}  // namespace reflow
