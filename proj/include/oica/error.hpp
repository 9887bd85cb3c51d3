#pragma once

#include <stdexcept>
#include <string>

namespace oica {

/// A precondition on user-supplied parameters was violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The estimate collapsed to the zero vector before renormalization.
class DegenerateState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bisection bracket does not straddle the predicate change.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ODE state left the finite range.
class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace oica
