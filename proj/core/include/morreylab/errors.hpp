#pragma once

#include <stdexcept>
#include <string>

namespace morreylab {

/// Raised when an operation is called outside its admissible parameter range
/// (violated hypotheses, empty regions, malformed inputs).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the p-Poisson solver when it cannot reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace morreylab
