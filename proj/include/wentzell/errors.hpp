#pragma once

#include <stdexcept>
#include <string>

namespace wentzell {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration (bad geometry spec, bad JSON field).
struct config_error : error {
  using error::error;
};

/// Vector/matrix size does not match the mesh or system.
struct dimension_error : error {
  using error::error;
};

/// Parameter outside its admissible range.
struct parameter_error : error {
  using error::error;
};

/// Solver breakdown: eigensolve failure, singular system, non-finite values.
struct numeric_error : error {
  using error::error;
};

/// A single time step failed (Newton non-convergence, blow-up guard).
struct step_error : error {
  using error::error;
};

/// Time integration aborted after step retries were exhausted.
struct integration_error : error {
  using error::error;
};

}  // namespace wentzell
