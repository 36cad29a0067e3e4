#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace tou::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolverDiagnostic = 3;

inline constexpr const char* kVersion = "1.0.0";

/// Entry point of the `tou` tool. Returns the process exit status.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace tou::cli
