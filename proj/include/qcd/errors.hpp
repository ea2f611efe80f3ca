#pragma once

#include <stdexcept>
#include <string>

namespace qcd {

enum class ErrorCode {
  NotPositiveDefinite,
  EvalAtCore,
  LoopThroughCore,
  GeometryError,
  MeshError,
  NonFiniteIntegrand,
  NotBoundary,
  IncompatibleFlux,
  SolverDiverged,
  BadRadii,
  BadCutoff,
  BadContour,
  DegenerateFit,
  ConfigError,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::EvalAtCore:          return "EvalAtCore";
    case ErrorCode::LoopThroughCore:     return "LoopThroughCore";
    case ErrorCode::GeometryError:       return "GeometryError";
    case ErrorCode::MeshError:           return "MeshError";
    case ErrorCode::NonFiniteIntegrand:  return "NonFiniteIntegrand";
    case ErrorCode::NotBoundary:         return "NotBoundary";
    case ErrorCode::IncompatibleFlux:    return "IncompatibleFlux";
    case ErrorCode::SolverDiverged:      return "SolverDiverged";
    case ErrorCode::BadRadii:            return "BadRadii";
    case ErrorCode::BadCutoff:           return "BadCutoff";
    case ErrorCode::BadContour:          return "BadContour";
    case ErrorCode::DegenerateFit:       return "DegenerateFit";
    case ErrorCode::ConfigError:         return "ConfigError";
    case ErrorCode::IoError:             return "IoError";
  }
  return "Unknown";
}

class QcdError : public std::runtime_error {
 public:
  QcdError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw QcdError(code, what);
}

}  // namespace qcd
