#include "ncmart/errors.hpp"

namespace ncmart {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::NonFiniteResult: return "NonFiniteResult";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorKind::NotSupermartingale: return "NotSupermartingale";
    case ErrorKind::NotAdapted: return "NotAdapted";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::NoFiniteIndex: return "NoFiniteIndex";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::InvalidHorizon: return "InvalidHorizon";
    case ErrorKind::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorKind::ParameterMismatch: return "ParameterMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace ncmart
