#pragma once

#include <stdexcept>
#include <string>

namespace enlab {

// Invalid numeric parameter (negative rate, bad weights, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input path or process does not fit the model's assumptions.
struct ModelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// The simulated horizon does not resolve the random time; extend and retry.
struct HorizonTooShort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A division by Z_- or 1 - Z_- on a charged cell or path segment.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FiltrationMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Two independent evaluations of the same quantity disagree.
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace enlab
