#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace divex {

// Failure categories shared by the engine, the HTTP layer and the C API.
enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  Validation,
  DuplicateId,
  InvalidItemKey,
  UnknownVideo,
  OrdinalOutOfRange,
  FrameGap,
  UnsupportedFormat,
  FrameTooSmall,
  DimensionMismatch,
  KindMismatch,
  MissingFeature,
  NoSuchConcept,
  UnknownSource,
  CapacityExceeded,
  EmptyInput,
  InvalidCriteria,
  CorruptCatalog,
  Bind,
  Internal,
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

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace divex
