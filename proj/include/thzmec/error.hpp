#pragma once

#include <stdexcept>
#include <string>

namespace thzmec {

enum class ErrorCode {
  invalid_argument,
  parse,
  infeasible,
  domain,
  io,
  unsupported,
  refused,
  internal,
};

/// Library-wide exception type. `code()` maps 1:1 onto the C API status codes.
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

}  // namespace thzmec
