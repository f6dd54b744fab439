#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reliefmatch {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidUtf8,
  kMissingGeo,
  kMissingTime,
  kInvalidRange,
  kZeroVector,
  kDimensionMismatch,
  kNonPositiveDelta,
  kDuplicateName,
  kUnknownPlugin,
  kPluginFailure,
  kTooFewVectors,
  kDimNotDivisible,
  kCorpusMismatch,
  kEmptyOfferCorpus,
  kEmbeddingMissing,
  kUnknownRequestId,
  kMissingGroupKey,
  kFormat,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. The code distinguishes the
// contract violations listed per operation; what() carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reliefmatch
