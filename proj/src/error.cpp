#include "divex/error.hpp"

namespace divex {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Validation: return "validation_error";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::InvalidItemKey: return "invalid_item_key";
    case ErrorCode::UnknownVideo: return "unknown_video";
    case ErrorCode::OrdinalOutOfRange: return "ordinal_out_of_range";
    case ErrorCode::FrameGap: return "frame_gap";
    case ErrorCode::UnsupportedFormat: return "unsupported_format";
    case ErrorCode::FrameTooSmall: return "frame_too_small";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::KindMismatch: return "kind_mismatch";
    case ErrorCode::MissingFeature: return "missing_feature";
    case ErrorCode::NoSuchConcept: return "no_such_concept";
    case ErrorCode::UnknownSource: return "unknown_source";
    case ErrorCode::CapacityExceeded: return "capacity_exceeded";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::InvalidCriteria: return "invalid_criteria";
    case ErrorCode::CorruptCatalog: return "corrupt_catalog";
    case ErrorCode::Bind: return "bind_failed";
    case ErrorCode::Internal: return "internal_error";
  }
  return "internal_error";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace divex
