#pragma once

#include <stdexcept>
#include <string>

namespace mmdedup {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input file does not match the expected CSV schema (header, column set,
// row arity, empty file).
class SchemaError : public Error {
public:
  using Error::Error;
};

// Well-formed input carrying invalid content (bad timestamp, duplicate key,
// out-of-range record id).
class ValidationError : public Error {
public:
  using Error::Error;
};

// Vector/matrix dimension disagreement between arguments.
class ShapeError : public Error {
public:
  using Error::Error;
};

// Invalid configuration value or a combination the pipeline cannot run with.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Filesystem-level failure (unreadable/unwritable path).
class IoError : public Error {
public:
  using Error::Error;
};

// Failure while talking to a remote embedding provider. `retryable` marks
// transient conditions (timeouts, transport failures, 5xx) worth retrying.
class ProviderError : public Error {
public:
  ProviderError(const std::string& msg, bool retryable)
      : Error(msg), retryable_(retryable) {}

  bool retryable() const { return retryable_; }

private:
  bool retryable_;
};

// Remote provider answered, but the payload violates the wire contract
// (vector count or dimension mismatch, malformed JSON).
class ProtocolError : public Error {
public:
  using Error::Error;
};

}  // namespace mmdedup
