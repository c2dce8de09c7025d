#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace embedgeo {

enum class ErrorCode {
  EmptyToken,
  ParseError,
  SchemaError,
  FormatError,
  UnsupportedLayout,
  ShapeError,
  DataError,
  EmptyAlignment,
  IndexError,
  ArgumentError,
  DegenerateQuery,
  SkippedCategory,
  DegenerateLabels,
  RankError,
  EmptyCorpus,
  IoError,
  InternalError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. what() carries a human-readable
/// message; code() is stable and is what callers should branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// DataError raised while validating a matrix; row() names the offending row.
class DataErrorAtRow : public Error {
 public:
  DataErrorAtRow(std::size_t row, const std::string& message)
      : Error(ErrorCode::DataError, message), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// RankError carrying the numerically detected rank.
class RankDeficient : public Error {
 public:
  RankDeficient(std::size_t rank, const std::string& message)
      : Error(ErrorCode::RankError, message), rank_(rank) {}

  std::size_t rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

}  // namespace embedgeo
