#pragma once

#include <stdexcept>
#include <string>

namespace pcrlab {

/// Malformed inputs: bad config values, out-of-range parameters, NaN entries.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An eigenvalue or pivot the caller needs sits at or below the rank
/// tolerance. `index()` is the offending component (1-based, math convention)
/// when known, -1 otherwise.
class RankDeficiencyError : public std::runtime_error {
 public:
  explicit RankDeficiencyError(const std::string& what, int index = -1)
      : std::runtime_error(what), index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

/// A stated precondition of the operation does not hold.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative kernel stopped at its cap; carries the residual it left.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace pcrlab
