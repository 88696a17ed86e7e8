#include "roughstop/error.hpp"

namespace roughstop {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::NoMatch: return "NoMatch";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::NotGroupLike: return "NotGroupLike";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error::Error(Verbatim, ErrorCode code, const std::string& text) : std::runtime_error(text), code_(code) {}

}  // namespace roughstop
