#include "geogp/error.hpp"

namespace geogp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInsufficientTrajectory: return "insufficient_trajectory";
    case ErrorCode::kInvalidTrajectory: return "invalid_trajectory";
    case ErrorCode::kDegenerateTrajectory: return "degenerate_trajectory";
    case ErrorCode::kNumeric: return "numeric_error";
    case ErrorCode::kAngleUndefined: return "angle_undefined";
    case ErrorCode::kTraceTooShort: return "trace_too_short";
    case ErrorCode::kWindowUnderflow: return "window_underflow";
    case ErrorCode::kShape: return "shape_error";
    case ErrorCode::kSingularGram: return "singular_gram";
    case ErrorCode::kCheckpointTooClose: return "checkpoint_too_close";
    case ErrorCode::kPromptTooShort: return "prompt_too_short";
    case ErrorCode::kRotationUnobservable: return "rotation_unobservable";
    case ErrorCode::kIdConflict: return "id_conflict";
    case ErrorCode::kAmbiguousPrompt: return "ambiguous_prompt";
    case ErrorCode::kIncompatibleVersion: return "incompatible_version";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInvalidState: return "invalid_state";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kCapacity: return "capacity_exceeded";
  }
  return "unknown";
}

}  // namespace geogp
