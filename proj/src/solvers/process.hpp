#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace reflow {

/// Child process with piped stdin/stdout (stderr merged into stdout).
class SolverProcess {
 public:
  SolverProcess(const std::string& executable, const std::vector<std::string>& args);
  ~SolverProcess();
  SolverProcess(const SolverProcess&) = delete;
  SolverProcess& operator=(const SolverProcess&) = delete;

  void write(const std::string& text);
  /// Lines up to (not including) `marker`. Throws SolverError on EOF or timeout.
  std::vector<std::string> read_until(const std::string& marker, std::chrono::steady_clock::time_point deadline);
  void kill();
  bool running() const { return pid_ > 0; }

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

}  // namespace reflow
