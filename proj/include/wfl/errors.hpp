#pragma once

#include <stdexcept>
#include <string>

namespace wfl {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

/// Evaluation point coincides with a (virtual) source.
class Singularity : public Error {
 public:
  using Error::Error;
};

class DegenerateChannel : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IllConditionedFit : public Error {
 public:
  using Error::Error;
};

class EmptyRegion : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// Raised by scans that need at least two minima.
class InsufficientMinima : public Error {
 public:
  using Error::Error;
};

}  // namespace wfl
