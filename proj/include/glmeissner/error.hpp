#pragma once

#include <stdexcept>
#include <string>

namespace glmeissner {

enum class ErrorCode {
  kNonPositiveSpacing,
  kDegenerateShape,
  kEmptyDomain,
  kOutOfBoundingBox,
  kWrongStorage,
  kMeshMismatch,
  kCurveOutsideDomain,
  kSolverDiverged,
  kMeshTooCoarse,
  kOutsideBall,
  kNonPositiveRadius,
  kInvalidEpsilon,
  kNonPositiveNormStar,
  kNoPositiveRatio,
  kMissingMeissnerData,
  kZeroOnPlaquette,
  kVortexPresent,
  kLineSearchStalled,
  kCoreTooSmall,
  kParseError,
  kValidationError,
  kNotDivergenceFree,
  kIoError,
};

const char* error_code_name(ErrorCode code);

// Every failure the library reports carries one of the codes above. The CLI
// maps them onto exit statuses (validation vs solver failure).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

  // True for errors caused by bad input rather than numerics.
  bool is_validation() const;

 private:
  ErrorCode code_;
};

}  // namespace glmeissner
