#include "fairrec/error.hpp"

namespace fairrec {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kMissingNoise: return "MissingNoise";
    case ErrorCode::kNotInvertible: return "NotInvertible";
    case ErrorCode::kUnknownTarget: return "UnknownTarget";
    case ErrorCode::kUnknownVariable: return "UnknownVariable";
    case ErrorCode::kMissingVariable: return "MissingVariable";
    case ErrorCode::kPolicyViolation: return "PolicyViolation";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kSingularFit: return "SingularFit";
    case ErrorCode::kEmptyNegativeGroup: return "EmptyNegativeGroup";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fairrec
