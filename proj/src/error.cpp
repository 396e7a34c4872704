#include "glmeissner/error.hpp"

namespace glmeissner {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveSpacing: return "NonPositiveSpacing";
    case ErrorCode::kDegenerateShape: return "DegenerateShape";
    case ErrorCode::kEmptyDomain: return "EmptyDomain";
    case ErrorCode::kOutOfBoundingBox: return "OutOfBoundingBox";
    case ErrorCode::kWrongStorage: return "WrongStorage";
    case ErrorCode::kMeshMismatch: return "MeshMismatch";
    case ErrorCode::kCurveOutsideDomain: return "CurveOutsideDomain";
    case ErrorCode::kSolverDiverged: return "SolverDiverged";
    case ErrorCode::kMeshTooCoarse: return "MeshTooCoarse";
    case ErrorCode::kOutsideBall: return "OutsideBall";
    case ErrorCode::kNonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::kInvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::kNonPositiveNormStar: return "NonPositiveNormStar";
    case ErrorCode::kNoPositiveRatio: return "NoPositiveRatio";
    case ErrorCode::kMissingMeissnerData: return "MissingMeissnerData";
    case ErrorCode::kZeroOnPlaquette: return "ZeroOnPlaquette";
    case ErrorCode::kVortexPresent: return "VortexPresent";
    case ErrorCode::kLineSearchStalled: return "LineSearchStalled";
    case ErrorCode::kCoreTooSmall: return "CoreTooSmall";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kNotDivergenceFree: return "NotDivergenceFree";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

bool Error::is_validation() const {
  switch (code_) {
    case ErrorCode::kSolverDiverged:
    case ErrorCode::kLineSearchStalled:
    case ErrorCode::kIoError:
      return false;
    default:
      return true;
  }
}

}  // namespace glmeissner
