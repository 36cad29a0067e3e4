#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tou/money.hpp"

namespace tou {

struct Period {
  double start_hour = 0.0;
  double end_hour = 0.0;
  Price rate;
};

/// A validated Time-of-Use tariff: contiguous periods tiling one day,
/// adjacent rates distinct, the last period at the global minimum rate.
class TouScheme {
 public:
  /// Checks the raw periods, merges equal-rate neighbours and returns the
  /// normalized scheme. Throws tou::Error on GapOrOverlap, NonPositiveRate,
  /// LastPeriodNotOffPeak or TooFewPeriods.
  static TouScheme validate(std::vector<Period> raw_periods);

  std::size_t size() const { return periods_.size(); }
  const std::vector<Period>& periods() const { return periods_; }
  Price rate(std::size_t i) const { return periods_.at(i).rate; }
  Price off_peak_rate() const { return periods_.back().rate; }

  /// Rates in cents, the representation solvers consume.
  std::vector<double> rates_cents() const;

  /// Same periods with every rate multiplied by `factor`.
  TouScheme scaled(std::int64_t factor) const;

 private:
  explicit TouScheme(std::vector<Period> periods) : periods_(std::move(periods)) {}
  std::vector<Period> periods_;
};

/// Paired local extrema of the daily rate sequence.
struct ExtremalPrices {
  std::vector<Price> maxima;
  std::vector<Price> minima;
};

/// Scans the rates with the terminal off-peak rate prepended (the storage
/// starts each day full at off-peak cost) and pairs each local maximum with
/// the local minimum that opens its rising run.
ExtremalPrices local_extrema(const TouScheme& scheme);

/// Maximal daily profit of one unit of storage: sum of (H_k - L_k) over the
/// paired extrema.
Price pi_max(const TouScheme& scheme);

/// The same quantity computed as the sum of positive rate increments over
/// the day with the overnight wrap. Kept separate so the two can be
/// checked against each other.
Price pi_max_from_increments(const TouScheme& scheme);

}  // namespace tou
