#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace tou {

// Money per unit energy, stored as an exact count of 0.01 cent units.
// Solvers work in floating point cents; this type is what crosses
// configuration and reporting boundaries.
class Price {
 public:
  static constexpr std::int64_t kUnitsPerCent = 100;

  constexpr Price() = default;

  static constexpr Price from_units(std::int64_t units) { return Price(units); }

  // Rejects values that are not representable at 0.01 cent resolution.
  static Price from_cents(double cents);

  // Exact decimal parse, e.g. "12.4" or "-0.05".
  static Price parse(std::string_view text);

  constexpr std::int64_t units() const { return units_; }
  constexpr double cents() const { return static_cast<double>(units_) / kUnitsPerCent; }

  std::string to_string() const;

  constexpr Price operator+(Price o) const { return Price(units_ + o.units_); }
  constexpr Price operator-(Price o) const { return Price(units_ - o.units_); }
  constexpr Price& operator+=(Price o) {
    units_ += o.units_;
    return *this;
  }
  constexpr auto operator<=>(const Price&) const = default;

 private:
  constexpr explicit Price(std::int64_t units) : units_(units) {}
  std::int64_t units_ = 0;
};

}  // namespace tou
