#pragma once

#include <stdexcept>
#include <string>

namespace safe_oco {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: wrong dimensions, out-of-range parameters, malformed config.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A solve, factorization or iterative method failed to produce a usable result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A request would exceed a hard resource cap (e.g. an epsilon-net too large).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A deterministic runtime audit (gamma bound, membership, recursion) failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation's precondition.
class PreconditionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace safe_oco
