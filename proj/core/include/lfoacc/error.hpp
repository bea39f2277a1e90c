#pragma once

#include <stdexcept>
#include <string>

namespace lfoacc {

enum class ErrorCode {
  invalid_argument,
  precondition,
  format,
  unsupported,
  io,
  missing_file,
  shape_mismatch,
  verification,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` tells callers which
/// contract was broken without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace lfoacc
