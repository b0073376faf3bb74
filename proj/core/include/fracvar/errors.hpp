#pragma once

#include <stdexcept>
#include <string>

namespace fracvar {

/// Malformed or inconsistent caller input (sizes, ranges, unknown names).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request that would exceed the built-in memory guards.
class ResourceError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A solver detected that its problem has no minimizer or no feasible point.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracvar
