#pragma once

#include <stdexcept>
#include <string>

namespace selfseg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: shape mismatch, non-finite values, out-of-range labels.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete configuration.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotFoundError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Raised when the segmentor cannot be guided (e.g. no class names).
class GuidanceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A remote service could not be reached or answered with a non-success status.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error with the pipeline stage it came from.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, bool transport);

  const std::string& stage() const noexcept { return stage_; }
  bool is_transport() const noexcept { return transport_; }

 private:
  std::string stage_;
  bool transport_;
};

}  // namespace selfseg
