#pragma once

#include <stdexcept>
#include <string>

namespace kdmcse {

enum class ErrorCode {
  DimensionMismatch,
  ZeroNormVector,
  EmptySequence,
  LengthMismatch,
  DegenerateInput,
  BatchLengthMismatch,
  ThresholdOutOfRange,
  UnknownGoldIndex,
  EmptyBatch,
  MaskShapeMismatch,
  DegenerateDenominator,
  MarginOutOfRange,
  ShapeMismatch,
  NonFiniteLoss,
  UnknownSentenceId,
  MissingForwardState,
  MalformedFile,
  ZeroNormRow,
  DuplicateId,
  UnknownId,
  InconsistentManifest,
  EmptyInput,
  FewerThanTwoPoints,
  ConfigError,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroNormVector: return "ZeroNormVector";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::BatchLengthMismatch: return "BatchLengthMismatch";
    case ErrorCode::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case ErrorCode::UnknownGoldIndex: return "UnknownGoldIndex";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::MaskShapeMismatch: return "MaskShapeMismatch";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::MarginOutOfRange: return "MarginOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::UnknownSentenceId: return "UnknownSentenceId";
    case ErrorCode::MissingForwardState: return "MissingForwardState";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::ZeroNormRow: return "ZeroNormRow";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::InconsistentManifest: return "InconsistentManifest";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::FewerThanTwoPoints: return "FewerThanTwoPoints";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

/// Library-wide exception. `code()` is stable and machine-checkable; the
/// what() string is `<CodeName>: <detail>`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace kdmcse
