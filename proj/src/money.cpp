#include "tou/money.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "tou/error.hpp"

namespace tou {

Price Price::from_cents(double cents) {
  if (!std::isfinite(cents)) {
    throw Error(ErrorCode::InvalidArgument, "price is not finite");
  }
  const double scaled = cents * kUnitsPerCent;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-6 * std::max(1.0, std::abs(scaled))) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("price {} is finer than 0.01 cent resolution", cents));
  }
  return Price(static_cast<std::int64_t>(rounded));
}

Price Price::parse(std::string_view text) {
  const auto fail = [&] {
    throw Error(ErrorCode::InvalidArgument, fmt::format("not a decimal price: '{}'", text));
  };
  if (text.empty()) fail();
  std::size_t pos = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (seen_point) fail();
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') fail();
    any_digit = true;
    if (!seen_point) {
      whole = whole * 10 + (c - '0');
      if (whole > (std::int64_t{1} << 50)) fail();
    } else if (frac_digits < 2) {
      frac = frac * 10 + (c - '0');
      ++frac_digits;
    } else if (c != '0') {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("price '{}' is finer than 0.01 cent resolution", text));
    }
  }
  if (!any_digit) fail();
  while (frac_digits < 2) {
    frac *= 10;
    ++frac_digits;
  }
  const std::int64_t units = whole * kUnitsPerCent + frac;
  return Price(negative ? -units : units);
}

std::string Price::to_string() const {
  const std::int64_t mag = units_ < 0 ? -units_ : units_;
  return fmt::format("{}{}.{:02d}", units_ < 0 ? "-" : "", mag / kUnitsPerCent,
                     mag % kUnitsPerCent);
}

}  // namespace tou
