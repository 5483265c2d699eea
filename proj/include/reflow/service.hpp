#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "reflow/runtime.hpp"

namespace reflow {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8765;  ///< 0 picks a free port
  std::size_t event_buffer = 64;
};

/// HTTP front of one RuntimeSession.
///
///   GET  /bundle  bounds, interval rows, widget tree, slices
///   POST /solve   {"width": N} -> {width, requested, coalesced, row, geometry, stats}
///   GET  /events  server-sent events, one per applied solve
///   GET  /health
///
/// Solves run on one worker. A request still waiting when a newer one
/// arrives is answered with the newer solve (coalesced = true).
class Service {
 public:
  Service(RuntimeSession session, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and starts serving in the background; throws Error when the
  /// port cannot be bound.
  void start();
  /// Blocks until stop() is called from elsewhere.
  void wait();
  void stop();
  int port() const;

  std::uint64_t solves() const;
  std::uint64_t dropped_events() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string geometry_json(const Geometry& g);
std::string stats_json(const SolveStats& s);
std::string bundle_summary_json(const DeployBundle& b);

}  // namespace reflow
