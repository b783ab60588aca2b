#pragma once

#include <stdexcept>

namespace rac {

/// Malformed input: bad documents, out-of-range parameters, dimension
/// mismatches. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A calibration problem with no feasible multiplier. Maps to CLI exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rac
