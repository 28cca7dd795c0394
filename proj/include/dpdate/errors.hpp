#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpdate {

enum class ErrorCode {
  NonPositiveSigma,
  AlphaOutOfRange,
  SingularDesign,
  NoConvergence,
  QuadratureFailure,
  DimensionMismatch,
  InsufficientPostPeriod,
  InvalidArgument,
  ZeroStandardError,
  AlphaMismatch,
  ParseError,
  MissingColumn,
  NonMonotoneTime,
  MissingValue,
  UsageError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace dpdate
