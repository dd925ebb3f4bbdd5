#pragma once

#include <stdexcept>
#include <string>

namespace peasflow {

enum class ErrorCode {
  DuplicateNode,
  CycleDetected,
  OrphanNode,
  UnknownNode,
  EmptyInput,
  EmptyCategory,
  MissingAttribute,
  TypeMismatch,
  ArityError,
  NonMonotoneTimestamp,
  ParseError,
  UnknownReference,
  InvariantViolation,
  InvalidGraph,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class so tests
/// and the CLI can map errors to exit codes without parsing messages.
class PeasError : public std::runtime_error {
 public:
  PeasError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace peasflow
