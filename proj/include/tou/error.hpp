#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tou {

enum class ErrorCode {
  InvalidArgument,
  GapOrOverlap,
  NonPositiveRate,
  LastPeriodNotOffPeak,
  TooFewPeriods,
  DegenerateGrid,
  GridMismatch,
  ZeroMean,
  IndexOutOfRange,
  NotMonotone,
  StateSpaceTooLarge,
  ConfigParseError,
  UnknownCommand,
};

std::string_view to_string(ErrorCode code);

// Validation failures and solver diagnostics. Solver diagnostics
// (NotMonotone, StateSpaceTooLarge) are the ones a caller may want to
// distinguish from bad input; see is_solver_diagnostic().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline bool is_solver_diagnostic(ErrorCode code) {
  return code == ErrorCode::NotMonotone || code == ErrorCode::StateSpaceTooLarge;
}

}  // namespace tou
