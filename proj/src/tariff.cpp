#include "tou/tariff.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tou/error.hpp"

namespace tou {

namespace {

constexpr double kHourTolerance = 1e-9;

bool same_hour(double a, double b) { return std::abs(a - b) <= kHourTolerance; }

// Daily rate sequence with the terminal off-peak rate prepended and equal
// neighbours collapsed.
std::vector<Price> wrapped_rates(const TouScheme& scheme) {
  std::vector<Price> seq;
  seq.reserve(scheme.size() + 1);
  seq.push_back(scheme.off_peak_rate());
  for (const auto& p : scheme.periods()) {
    if (p.rate != seq.back()) seq.push_back(p.rate);
  }
  return seq;
}

}  // namespace

TouScheme TouScheme::validate(std::vector<Period> raw) {
  if (raw.empty()) {
    throw Error(ErrorCode::InvalidArgument, "tariff has no periods");
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].rate.units() <= 0) {
      throw Error(ErrorCode::NonPositiveRate,
                  fmt::format("period {} has rate {}", i + 1, raw[i].rate.to_string()));
    }
  }
  if (!same_hour(raw.front().start_hour, 0.0)) {
    throw Error(ErrorCode::GapOrOverlap,
                fmt::format("first period starts at {}h, not 0h", raw.front().start_hour));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& p = raw[i];
    if (!(p.end_hour > p.start_hour + kHourTolerance)) {
      throw Error(ErrorCode::GapOrOverlap,
                  fmt::format("period {} [{}h, {}h) is empty or reversed", i + 1, p.start_hour,
                              p.end_hour));
    }
    if (i > 0 && !same_hour(raw[i - 1].end_hour, p.start_hour)) {
      throw Error(ErrorCode::GapOrOverlap,
                  fmt::format("period {} ends at {}h but period {} starts at {}h", i,
                              raw[i - 1].end_hour, i + 1, p.start_hour));
    }
  }
  if (!same_hour(raw.back().end_hour, 24.0)) {
    throw Error(ErrorCode::GapOrOverlap,
                fmt::format("last period ends at {}h, not 24h", raw.back().end_hour));
  }

  std::vector<Period> merged;
  for (const auto& p : raw) {
    if (!merged.empty() && merged.back().rate == p.rate) {
      merged.back().end_hour = p.end_hour;
    } else {
      merged.push_back(p);
    }
  }
  if (merged.size() < 2) {
    throw Error(ErrorCode::TooFewPeriods,
                fmt::format("{} distinct period(s) after merging equal rates; need at least 2",
                            merged.size()));
  }
  const auto min_rate =
      std::min_element(merged.begin(), merged.end(),
                       [](const Period& a, const Period& b) { return a.rate < b.rate; })
          ->rate;
  if (merged.back().rate != min_rate) {
    throw Error(ErrorCode::LastPeriodNotOffPeak,
                fmt::format("last rate {} exceeds the minimum rate {}",
                            merged.back().rate.to_string(), min_rate.to_string()));
  }
  return TouScheme(std::move(merged));
}

std::vector<double> TouScheme::rates_cents() const {
  std::vector<double> out;
  out.reserve(periods_.size());
  for (const auto& p : periods_) out.push_back(p.rate.cents());
  return out;
}

TouScheme TouScheme::scaled(std::int64_t factor) const {
  if (factor <= 0) throw Error(ErrorCode::InvalidArgument, "scale factor must be positive");
  auto periods = periods_;
  for (auto& p : periods) p.rate = Price::from_units(p.rate.units() * factor);
  return TouScheme(std::move(periods));
}

ExtremalPrices local_extrema(const TouScheme& scheme) {
  const auto seq = wrapped_rates(scheme);
  ExtremalPrices out;
  // seq starts and ends at the global minimum and has no equal neighbours,
  // so it alternates between rising and falling runs.
  Price run_low = seq.front();
  for (std::size_t k = 1; k < seq.size(); ++k) {
    const bool rising = seq[k] > seq[k - 1];
    const bool peak = rising && (k + 1 == seq.size() || seq[k + 1] < seq[k]);
    const bool trough = !rising && (k + 1 < seq.size() && seq[k + 1] > seq[k]);
    if (peak) {
      out.maxima.push_back(seq[k]);
      out.minima.push_back(run_low);
    }
    if (trough) run_low = seq[k];
  }
  return out;
}

Price pi_max(const TouScheme& scheme) {
  const auto ext = local_extrema(scheme);
  Price total;
  for (std::size_t k = 0; k < ext.maxima.size(); ++k) total += ext.maxima[k] - ext.minima[k];
  return total;
}

Price pi_max_from_increments(const TouScheme& scheme) {
  Price total;
  Price prev = scheme.off_peak_rate();
  for (const auto& p : scheme.periods()) {
    if (p.rate > prev) total += p.rate - prev;
    prev = p.rate;
  }
  return total;
}

}  // namespace tou
