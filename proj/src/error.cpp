#include "lanekit/error.hpp"

namespace lanekit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingFrame: return "MissingFrame";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kUnderdetermined: return "Underdetermined";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::kSingularRow: return "SingularRow";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kNoGroundIntersection: return "NoGroundIntersection";
    case ErrorCode::kDegenerateLane: return "DegenerateLane";
    case ErrorCode::kZeroLengthSegment: return "ZeroLengthSegment";
    case ErrorCode::kNumericallySingular: return "NumericallySingular";
    case ErrorCode::kNoFeasibleAssignment: return "NoFeasibleAssignment";
    case ErrorCode::kAnchorMismatch: return "AnchorMismatch";
  }
  return "Unknown";
}

}  // namespace lanekit
