#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncmart {

enum class ErrorKind {
  NonHermitianInput,
  NonFiniteResult,
  DimensionMismatch,
  LevelOutOfRange,
  NotSupermartingale,
  NotAdapted,
  PreconditionFailed,
  RangeError,
  NoFiniteIndex,
  InvalidParams,
  InvalidHorizon,
  StateSpaceTooLarge,
  ParameterMismatch,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind so the
/// experiment runner can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ncmart
