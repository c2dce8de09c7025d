#include "embedgeo/error.hpp"

namespace embedgeo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyToken: return "EmptyToken";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnsupportedLayout: return "UnsupportedLayout";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::DataError: return "DataError";
    case ErrorCode::EmptyAlignment: return "EmptyAlignment";
    case ErrorCode::IndexError: return "IndexError";
    case ErrorCode::ArgumentError: return "ArgumentError";
    case ErrorCode::DegenerateQuery: return "DegenerateQuery";
    case ErrorCode::SkippedCategory: return "SkippedCategory";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::RankError: return "RankError";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InternalError: return "InternalError";
  }
  return "Unknown";
}

}  // namespace embedgeo
