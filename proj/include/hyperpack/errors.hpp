#pragma once

#include <stdexcept>
#include <string>

namespace hyperpack {

// Base for everything this library throws on purpose. Catching Error at the
// CLI boundary separates our diagnostics from genuine std::runtime_error.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Validation failures: bad arguments, impossible configurations.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Vector norm below the normalization epsilon; no direction recoverable.
class DegenerateVector : public Error {
 public:
  using Error::Error;
};

class TooFewPoints : public Error {
 public:
  using Error::Error;
};

class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

class EmptyGallery : public Error {
 public:
  using Error::Error;
};

class GalleryTooSmall : public Error {
 public:
  using Error::Error;
};

class BatchTooSmall : public Error {
 public:
  using Error::Error;
};

// Exhaustive batch enumeration would exceed the supported count.
class TooManyBatches : public Error {
 public:
  using Error::Error;
};

// Finite-difference probe crossed a selection boundary (min pair or nearest
// gallery point changed under perturbation); the check is invalid there.
class UnstableSelection : public Error {
 public:
  using Error::Error;
};

class IdentityMismatch : public Error {
 public:
  using Error::Error;
};

class MalformedTrace : public Error {
 public:
  using Error::Error;
};

// I/O and file-format failures. The CLI maps these to a distinct exit code.
class IoError : public Error {
 public:
  using Error::Error;
};

class BadMagic : public IoError {
 public:
  using IoError::IoError;
};

class UnsupportedVersion : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedPayload : public IoError {
 public:
  using IoError::IoError;
};

class NormViolation : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace hyperpack
