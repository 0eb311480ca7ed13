#pragma once

#include <stdexcept>
#include <string>

namespace nanobus {

/// Step doubling (or another iterative method) failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested gate or schedule cannot be realised with the given limits.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nanobus
