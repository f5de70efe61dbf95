#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairrec {

enum class ErrorCode {
  kCycleDetected,
  kMissingNoise,
  kNotInvertible,
  kUnknownTarget,
  kUnknownVariable,
  kMissingVariable,
  kPolicyViolation,
  kDegenerateData,
  kNonConvergence,
  kSingularFit,
  kEmptyNegativeGroup,
  kInvalidArgument,
  kParseError,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (and the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // what() without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace fairrec
