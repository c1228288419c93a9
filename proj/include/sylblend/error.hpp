#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sylblend {

enum class ErrorCode {
  FormatError,
  UnsupportedFormat,
  ParseError,
  ZeroVariance,
  TooShort,
  EmptyInput,
  BandTooNarrow,
  LengthMismatch,
  BadParam,
  SingleClass,
  NonFiniteFeature,
  ShapeMismatch,
  DegenerateSplit,
  EmptyPool,
  LabelError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `line()` is set for errors that
/// point into a text file (1-based).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace sylblend
