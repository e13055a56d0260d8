#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wnopt {

enum class ErrorCode {
  InvalidArgument,
  Cyclic,
  Corrupt,
  UnboundedBigM,
  MissingQuality,
  EmptyObjective,
  OverlappingOptions,
  MissingSolver,
  SolverCrash,
  ParseError,
  BudgetExceeded,
  NumericalBreakdown,
  ExplosionGuard,
  SampleRejected,
  Io,
  ValidationFailed,
};

std::string_view to_string(ErrorCode code);

// All engine failures are reported through this type; `code()` is stable and
// machine-checkable, `what()` carries a human readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Cyclic: return "Cyclic";
    case ErrorCode::Corrupt: return "Corrupt";
    case ErrorCode::UnboundedBigM: return "UnboundedBigM";
    case ErrorCode::MissingQuality: return "MissingQuality";
    case ErrorCode::EmptyObjective: return "EmptyObjective";
    case ErrorCode::OverlappingOptions: return "OverlappingOptions";
    case ErrorCode::MissingSolver: return "MissingSolver";
    case ErrorCode::SolverCrash: return "SolverCrash";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::ExplosionGuard: return "ExplosionGuard";
    case ErrorCode::SampleRejected: return "SampleRejected";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
  }
  return "Unknown";
}

}  // namespace wnopt
