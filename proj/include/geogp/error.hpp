#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geogp {

/// Failure categories surfaced by the pipeline. The service layer maps these
/// onto structured API errors, the CLI onto exit codes.
enum class ErrorCode {
  kInsufficientTrajectory,
  kInvalidTrajectory,
  kDegenerateTrajectory,
  kNumeric,
  kAngleUndefined,
  kTraceTooShort,
  kWindowUnderflow,
  kShape,
  kSingularGram,
  kCheckpointTooClose,
  kPromptTooShort,
  kRotationUnobservable,
  kIdConflict,
  kAmbiguousPrompt,
  kIncompatibleVersion,
  kParse,
  kIo,
  kInvalidArgument,
  kInvalidState,
  kNotFound,
  kCapacity,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace geogp
