#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reflow/localsmt.hpp"
#include "reflow/preprocess.hpp"

namespace reflow {

struct GeometryEntry {
  std::string id;
  bool visible = true;
  std::int64_t x = 0, y = 0, width = 0, height = 0;
  friend bool operator==(const GeometryEntry&, const GeometryEntry&) = default;
};

/// Drawn rectangles at one screen width; invisible widgets are absent.
struct Geometry {
  std::int64_t screen_width = 0;
  std::vector<GeometryEntry> widgets;

  const GeometryEntry* find(std::string_view id) const;
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct SolveStats {
  double millis = 0;
  double outer_millis = 0;   ///< abstraction
  double refine_millis = 0;  ///< refinement
  std::uint64_t steps = 0;
  std::uint64_t outer_steps = 0;
  std::string backend;
  bool reasoning_reused = false;
  bool fallback = false;  ///< the complete backend settled a step
  std::size_t row = 0;
  std::size_t slices_solved = 0;
  std::size_t slices_reused = 0;
};

struct RuntimeOptions {
  std::string backend = "local";  ///< local, external or oracle
  SearchConfig search{.budget_ms = 20};
  ExternalConfig external;
};

/// Terminal-end engine over one bundle. Not thread-safe; one driver at a time.
class RuntimeSession {
 public:
  explicit RuntimeSession(DeployBundle bundle, RuntimeOptions options = {});
  ~RuntimeSession();
  RuntimeSession(RuntimeSession&&) noexcept;
  RuntimeSession& operator=(RuntimeSession&&) noexcept;

  static RuntimeSession load(const std::string& path, RuntimeOptions options = {});

  /// Cold solve: per-row reasoning is still cached, but no warm start.
  Geometry solve_at_width(std::int64_t width, SolveStats* stats = nullptr);
  /// Warm-started from the previous solve.
  Geometry incremental_update(std::int64_t width, SolveStats* stats = nullptr);

  const DeployBundle& bundle() const;
  /// Composed model over the full registry for the last solve.
  const Model& model() const;
  std::int64_t min_width() const;
  std::int64_t max_width() const;
  std::optional<std::size_t> current_row() const;
  /// Times Boolean reasoning + elimination ran (outer rows and slice keys).
  std::uint64_t reasoning_runs() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Drawn set from a composed model.
Geometry realize_geometry(const DeployBundle& bundle, const Model& model, std::int64_t screen_width);

/// Model whose widget boxes and visibility come from `g`; auxiliary
/// variables are taken from `aux`.
Model geometry_model(const DeployBundle& bundle, const Geometry& g, const Model& aux);

}  // namespace reflow
