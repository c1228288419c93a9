#include "sylblend/error.hpp"

namespace sylblend {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BandTooNarrow: return "BandTooNarrow";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadParam: return "BadParam";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::LabelError: return "LabelError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& what,
                     std::optional<std::size_t> line) {
  std::string msg(to_string(code));
  if (line) msg += " (line " + std::to_string(*line) + ")";
  msg += ": ";
  msg += what;
  return msg;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& what,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, what, line)), code_(code), line_(line) {}

}  // namespace sylblend
