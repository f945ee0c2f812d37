#pragma once

#include <stdexcept>
#include <string>

namespace mcse {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDimensionMismatch,
  kIo,
  kNumeric,
  kDegenerate,
  kOutOfRange,
  kRejectionBudget,
};

// All library failures are reported as mcse::Error; the C API maps the code
// onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) Fail(code, what);
}

}  // namespace mcse
