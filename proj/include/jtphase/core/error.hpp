#pragma once

#include <stdexcept>
#include <string>

namespace jtphase {

// Caller supplied something outside the documented domain (bad grid, negative
// coupling, mismatched fields). The CLI maps this to a usage error.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The inputs were valid but the computation could not produce a trustworthy
// number (non-finite integrand, norm drift, eigensolver stalled, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace jtphase
