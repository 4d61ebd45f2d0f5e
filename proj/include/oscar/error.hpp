#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscar {

enum class ErrorCode {
  EmptyInput,
  ProviderViolation,
  EmptyWindow,
  DegenerateImage,
  DimensionMismatch,
  ZeroVector,
  ProviderUnavailable,
  LengthMismatch,
  EmptyBatch,
  UnknownStep,
  WrongArity,
  EmptyCorpus,
  MalformedDocument,
  SchemaViolation,
  InvalidArgument,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ProviderViolation: return "ProviderViolation";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::UnknownStep: return "UnknownStep";
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Domain error raised by every oscar component. The code is stable and is
/// what tests and the CLI dispatch on; the message carries context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix, for rewrapping with extra context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace oscar
