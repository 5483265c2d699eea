#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reflow/layout.hpp"
#include "reflow/preprocess.hpp"
#include "reflow/preview.hpp"

namespace reflow {

struct BuildOptions {
  /// Backend for hardening, cores and preview fallback: external or oracle.
  /// "auto" picks external when an executable is found.
  std::string backend = "auto";
  ExternalConfig external;
  PreviewOptions preview;
  std::string audit_dir;  ///< hardened formulas and tables are dumped here when set
  std::uint64_t seed = 1;
  bool extract = true;  ///< false: monolithic bundle, no slices
};

struct SweepLog {
  std::string formula;  ///< "outer" or "<widget>.w" / "<widget>.h"
  PreviewResult result;
};

struct BuildReport {
  PreviewStatus status = PreviewStatus::clean;
  std::optional<ConflictReport> conflict;
  std::optional<DeployBundle> bundle;  ///< absent on conflict
  std::vector<SweepLog> sweeps;
  std::vector<std::string> log;
  std::size_t widgets = 0;
  std::size_t clauses = 0;
  std::size_t softs = 0;
  std::size_t outer_clauses = 0;
};

/// compile → extract → preview slices → harden outer → preview outer → bundle.
/// A hard conflict stops the pipeline and leaves `bundle` empty.
BuildReport build_pipeline(const LayoutSpec& spec, const BuildOptions& options = {});

/// Resolves "auto" and builds the backend.
std::unique_ptr<Backend> pipeline_backend(const BuildOptions& options);

}  // namespace reflow
