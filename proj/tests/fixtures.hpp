#pragma once

// Shared instances and the two-peak tariff used across suites.

#include <cstdint>
#include <random>
#include <vector>

#include "tou/demand.hpp"
#include "tou/tariff.hpp"

namespace tou::testing {

inline Period period(double start, double end, const char* rate) {
  return Period{start, end, Price::parse(rate)};
}

inline TouScheme scheme_from_rates(const std::vector<std::int64_t>& rate_units) {
  std::vector<Period> periods;
  const double width = 24.0 / static_cast<double>(rate_units.size());
  for (std::size_t i = 0; i < rate_units.size(); ++i) {
    const double end = i + 1 == rate_units.size() ? 24.0 : width * static_cast<double>(i + 1);
    periods.push_back({width * static_cast<double>(i), end, Price::from_units(rate_units[i])});
  }
  return TouScheme::validate(std::move(periods));
}

// Four-tier, two-peak tariff: 0-7h 6.7, 7-11h 12.4, 11-17h 10.4, 17-19h 12.4, 19-24h 6.7.
inline TouScheme two_peak_tariff() {
  return TouScheme::validate({period(0, 7, "6.7"), period(7, 11, "12.4"), period(11, 17, "10.4"),
                              period(17, 19, "12.4"), period(19, 24, "6.7")});
}

inline DiscreteDemand masses(double step, std::vector<double> m) {
  return DiscreteDemand(step, std::move(m));
}

// Random small instance: n periods, integer rates in cents with the last
// period at the strict minimum, demands with support <= max_support cells.
struct SmallInstance {
  TouScheme scheme;
  std::vector<DiscreteDemand> demands;
};

inline SmallInstance random_instance(std::mt19937_64& gen, std::size_t max_periods = 5,
                                     std::size_t max_support = 6, double step = 1.0) {
  std::uniform_int_distribution<std::size_t> n_dist(2, max_periods);
  const std::size_t n = n_dist(gen);
  std::uniform_int_distribution<std::int64_t> rate_dist(2, 30);
  std::vector<std::int64_t> rates;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::int64_t r = rate_dist(gen);
    if (!rates.empty() && r * 100 == rates.back()) r += 1;
    rates.push_back(r * 100);
  }
  std::int64_t low = rates.front();
  for (auto r : rates) low = std::min(low, r);
  std::uniform_int_distribution<std::int64_t> last_dist(1, low / 100 - 1 > 0 ? low / 100 - 1 : 1);
  std::int64_t last = last_dist(gen) * 100;
  if (last >= low) last = low - 50;
  rates.push_back(last);

  std::vector<DiscreteDemand> demands;
  std::uniform_int_distribution<std::size_t> support_dist(1, max_support);
  std::uniform_int_distribution<int> offset_dist(0, 3);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t support = support_dist(gen);
    const int offset = offset_dist(gen);
    std::vector<double> m(static_cast<std::size_t>(offset) + support, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < support; ++k) {
      m[static_cast<std::size_t>(offset) + k] = weight(gen);
      total += m[static_cast<std::size_t>(offset) + k];
    }
    for (double& v : m) v /= total;
    demands.emplace_back(step, std::move(m));
  }
  return {scheme_from_rates(rates), std::move(demands)};
}

}  // namespace tou::testing
