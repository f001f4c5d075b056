#include "singdiff/errors.hpp"

namespace singdiff {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::SingularArgument: return "SingularArgument";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::CovarianceNotPSD: return "CovarianceNotPSD";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::IndefiniteMatrix: return "IndefiniteMatrix";
    case ErrorCode::RhoFloorViolation: return "RhoFloorViolation";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace singdiff
