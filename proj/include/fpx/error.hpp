#pragma once

#include <stdexcept>
#include <string>

namespace fpx {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the supported domain (order, sizes, options).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Piecewise-linear basis envelope failed its dense-sampling self check.
class EnvelopeInvalid : public Error {
 public:
  using Error::Error;
};

/// Element whose bounding box has zero extent along every axis, or whose
/// nodal data is not finite.
class DegenerateElement : public Error {
 public:
  using Error::Error;
};

/// A collective call failed on some rank.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Field blocks do not match the mesh they are evaluated on.
class FieldMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed mesh, point, record or cache file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace fpx
