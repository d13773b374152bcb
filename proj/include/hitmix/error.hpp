#pragma once

#include <stdexcept>
#include <string>

namespace hitmix {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse = 2,
  Io = 3,
  NotConverged = 4,
  Unreachable = 5,
  Numerical = 6,
};

// All library failures are reported through this type; the C layer maps
// code() onto hm_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace hitmix
