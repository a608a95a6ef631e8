#pragma once

#include <stdexcept>
#include <string>

namespace vortex {

/// Thrown when a computation cannot produce a trustworthy number
/// (series non-convergence, cancellation, non-finite output).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid inputs are reported with std::invalid_argument throughout.

}  // namespace vortex
