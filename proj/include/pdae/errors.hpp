#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace pdae {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejected input: bad sizes, inconsistent specs, schemes without a valid
// closure, preconditions a caller can fix.  The CLI maps this to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Numerical failure inside a solve.  time_step is the time level being
// computed when the failure happened (-1 if not stepping), condition_estimate
// the estimate that triggered it (inf for a hard pivot breakdown).  The CLI
// maps this to exit code 3.
struct SolverError : Error {
  long time_step = -1;
  double condition_estimate = std::nan("");

  explicit SolverError(const std::string& what, long step = -1,
                       double cond = std::nan(""))
      : Error(what), time_step(step), condition_estimate(cond) {}
};

}  // namespace pdae
