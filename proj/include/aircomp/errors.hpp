#pragma once

#include <stdexcept>
#include <string>

namespace aircomp {

// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Base class for solver-level failures.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative solve exhausted its budget.  Carries the best residual
// (feasibility phase) or duality gap (per-cell dual) reached.
struct NonConvergence : SolverError {
  NonConvergence(const std::string& what, double res)
      : SolverError(what), residual(res) {}
  double residual;
};

}  // namespace aircomp
