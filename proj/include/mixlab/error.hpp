#pragma once

#include <stdexcept>
#include <string>

namespace mixlab {

enum class ErrorCode {
  kShape = 1,
  kNotSpd,
  kStepSize,
  kInvalidWeights,
  kInvalidHypergradient,
  kBadGeneratorParams,
  kMarginViolation,
  kEmptyInput,
  kInvalidApproximator,
  kRegimeNotMet,
  kNumericalAbort,
  kConfig,
  kIo,
  kNonConvergence,
  kDegenerateFit,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace mixlab
