#pragma once

#include <stdexcept>
#include <string>

namespace roughstop {

enum class ErrorCode {
  MalformedRow,
  EmptySeries,
  NonPositivePrice,
  NoMatch,
  DegenerateWindow,
  InsufficientData,
  NonFiniteInput,
  ShapeMismatch,
  DegenerateSeries,
  LengthMismatch,
  IndexOutOfRange,
  InvalidParams,
  UnknownChannel,
  NotGroupLike,
  SingularSystem,
  NonFiniteLoss,
  InvalidConfig,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 protected:
  struct Verbatim {};
  // what() is exactly `text`
  Error(Verbatim, ErrorCode code, const std::string& text);

 private:
  ErrorCode code_;
};

}  // namespace roughstop
