#pragma once

#include <stdexcept>
#include <string>

namespace mshr {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  DimensionMismatch,
  OutOfRange,
  NoRegion,
  EmptyRegion,
  Internal,
};

/// Library error carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mshr
