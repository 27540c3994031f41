#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ressf {

/// Machine-readable failure categories. CLI rows carry these as error codes.
enum class ErrorCode {
  InvalidInput,
  DimensionMismatch,
  SingularResolvent,
  PoleEvaluation,
  DefectiveCluster,
  DegeneratePath,
  GroupOverlap,
  Instability,
  ContourCollision,
  Geometry,
  Convergence,
  AmbiguousCount,
  EndpointProximity,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::SingularResolvent: return "singular-resolvent";
    case ErrorCode::PoleEvaluation: return "pole-evaluation";
    case ErrorCode::DefectiveCluster: return "defective-cluster";
    case ErrorCode::DegeneratePath: return "degenerate-path";
    case ErrorCode::GroupOverlap: return "group-overlap";
    case ErrorCode::Instability: return "instability";
    case ErrorCode::ContourCollision: return "contour-collision";
    case ErrorCode::Geometry: return "geometry";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::AmbiguousCount: return "ambiguous-count";
    case ErrorCode::EndpointProximity: return "endpoint-proximity";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when the trace function is evaluated on top of one of its poles.
class PoleEvaluationError : public Error {
 public:
  PoleEvaluationError(std::complex<double> nearest_pole, const std::string& what)
      : Error(ErrorCode::PoleEvaluation, what), nearest_pole_(nearest_pole) {}

  std::complex<double> nearest_pole() const noexcept { return nearest_pole_; }

 private:
  std::complex<double> nearest_pole_;
};

}  // namespace ressf
