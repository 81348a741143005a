#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capassign {

enum class ErrorCode {
  InvalidParameter,
  DimensionMismatch,
  NotStabilizable,
  NotDetectable,
  IllConditioned,
  SteadyStateUndefined,
  StepSizeUnderflow,
  NonFiniteState,
  Infeasible,
  NonSquare,
  NoConvergence,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when the Riccati residual cannot be brought under tolerance.
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& message, double residual)
      : Error(ErrorCode::IllConditioned, message), residual_(residual) {}

  double achieved_residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace capassign
