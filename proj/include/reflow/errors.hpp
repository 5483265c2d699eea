#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace reflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model left a referenced variable unassigned.
class EvalError : public Error {
 public:
  explicit EvalError(std::string variable)
      : Error("unassigned variable '" + variable + "'"), variable_(std::move(variable)) {}
  const std::string& variable() const { return variable_; }

 private:
  std::string variable_;
};

/// Unsatisfiable hard constraints; `origins` names the clauses involved.
class ConflictError : public Error {
 public:
  ConflictError(const std::string& what, std::vector<std::string> origins)
      : Error(what), origins_(std::move(origins)) {}
  const std::vector<std::string>& origins() const { return origins_; }

 private:
  std::vector<std::string> origins_;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Oracle refused because the instance exceeds its enumeration limits.
class LimitError : public Error {
 public:
  using Error::Error;
};

class BundleError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  RangeError(std::int64_t value, std::int64_t lo, std::int64_t hi)
      : Error("width " + std::to_string(value) + " outside [" + std::to_string(lo) + ", " +
              std::to_string(hi) + "]"),
        lo_(lo),
        hi_(hi) {}
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }

 private:
  std::int64_t lo_;
  std::int64_t hi_;
};

}  // namespace reflow
