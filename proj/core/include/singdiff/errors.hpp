#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace singdiff {

enum class ErrorCode {
  QuadratureFailure,
  SingularArgument,
  IndexOutOfRange,
  InvalidParameter,
  GridTooLarge,
  CovarianceNotPSD,
  OutOfDomain,
  UnknownPreset,
  HorizonExceeded,
  NotSymmetric,
  IndefiniteMatrix,
  RhoFloorViolation,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI) can map it to a diagnostic and an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Configuration problem located at a dotted key path (e.g. `field.gamma`).
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& message)
      : Error(ErrorCode::ParseError, "at '" + path + "': " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace singdiff
