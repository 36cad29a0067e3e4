#include "tou/error.hpp"

namespace tou {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GapOrOverlap: return "GapOrOverlap";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::LastPeriodNotOffPeak: return "LastPeriodNotOffPeak";
    case ErrorCode::TooFewPeriods: return "TooFewPeriods";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotMonotone: return "NotMonotone";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
  }
  return "Unknown";
}

}  // namespace tou
