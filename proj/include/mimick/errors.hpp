#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mimick {

// Root of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced while the tape runs in checked mode.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. `line()` is 1-based; 0 means "not line specific".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Word not resolvable under the requested backoff policy.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Tag, attribute or value outside the training-derived schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class ArchiveError : public Error {
 public:
  enum class Kind {
    kIo,
    kBadMagic,
    kVersionMismatch,
    kKindMismatch,
    kTruncated,
    kMissingTensor,
    kShapeMismatch,
    kCorruptManifest,
  };
  ArchiveError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace mimick
