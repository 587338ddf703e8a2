#pragma once

#include <stdexcept>
#include <string>

namespace benthic {

enum class ErrorCode {
  NonconformingGrowth,
  InvalidParameter,
  DegenerateMortality,
  NoRoots,
  RegimeMismatch,
  GapConditionFailed,
  PreconditionViolated,
  BadResolution,
  StepRejected,
  LinearSolveFailure,
  SingularSystem,
  HitHorizon,
  NonPositiveEigenfunction,
  BracketFailure,
  ParseError,
  SchemaError,
  UnknownPreset,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonconformingGrowth: return "NonconformingGrowth";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DegenerateMortality: return "DegenerateMortality";
    case ErrorCode::NoRoots: return "NoRoots";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::GapConditionFailed: return "GapConditionFailed";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::BadResolution: return "BadResolution";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::HitHorizon: return "HitHorizon";
    case ErrorCode::NonPositiveEigenfunction: return "NonPositiveEigenfunction";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; the code tells callers (and the CLI
/// exit-code mapping) which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace benthic
