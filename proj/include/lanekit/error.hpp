#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lanekit {

// Every failure the library can report. The CLI maps these onto exit codes,
// so the numeric values are part of the public contract.
enum class ErrorCode {
  kInvalidArgument = 1,
  kConfigError = 2,
  kParseError = 3,
  kMissingFrame = 4,
  kMissingField = 5,
  kUnderdetermined = 6,
  kIoError = 7,
  kSchemaVersionMismatch = 8,
  kSingularRow = 10,
  kBehindCamera = 11,
  kNoGroundIntersection = 12,
  kDegenerateLane = 13,
  kZeroLengthSegment = 14,
  kNumericallySingular = 15,
  kNoFeasibleAssignment = 16,
  kAnchorMismatch = 17,
};

std::string_view to_string(ErrorCode code);

class LaneError : public std::runtime_error {
 public:
  LaneError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lanekit
