#pragma once

#include <stdexcept>
#include <string>

namespace rangewalk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad measure, bad parameter, out-of-range index.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Elements or measures from different groups were combined.
class DescriptorMismatch : public Error {
 public:
  using Error::Error;
};

/// A configurable state/outcome cap was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A trace digraph violates the generated-by-a-walk precondition.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A trace code is internally inconsistent.
class MalformedCode : public Error {
 public:
  using Error::Error;
};

/// The requested analysis is not available for this group or measure.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// The walk does not escape in the required direction (drift not negative).
class NotEscapingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A requested accuracy cannot be met with the given parameters.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// A consistency check between two computations failed.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace rangewalk
