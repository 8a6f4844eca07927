#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tcnlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An argument is outside the operation's domain (probability, label, index...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward() on a non-scalar.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the byte offset where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// NaN/Inf encountered in a loss, gradient or parameter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Bad configuration, unknown preset or override key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Checkpoint does not match the model it is loaded into.
class CheckpointMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace tcnlab
