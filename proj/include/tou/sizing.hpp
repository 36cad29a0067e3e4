#pragma once

#include <span>
#include <string>
#include <vector>

#include "tou/demand.hpp"
#include "tou/money.hpp"
#include "tou/policy.hpp"
#include "tou/tariff.hpp"

namespace tou {

struct MarginalRevenuePoint {
  double capacity_kwh = 0.0;
  double total_marginal_revenue = 0.0;  // cents per kWh of capacity per day
};

struct SizingResult {
  bool feasible = false;
  Price pi_s;
  Price pi_max;
  Cells c_star_cells = 0;
  double c_star = 0.0;  // kWh
  // Total marginal revenue at c_star - step (absent when c_star == 0) and
  // at c_star; pi_s lies in [mr_at_c_star, mr_below_c_star).
  double mr_below_c_star = 0.0;
  double mr_at_c_star = 0.0;
  double expected_daily_cost_at_c_star = 0.0;
  double expected_daily_cost_without_storage = 0.0;
  Cells search_upper_bound = 0;
  std::vector<MarginalRevenuePoint> mr_curve;
  std::vector<std::string> warnings;
  ReservationPolicy policy;

  /// Operating cost plus the amortized storage cost, cents per day.
  double total_daily_cost() const {
    return expected_daily_cost_at_c_star + pi_s.cents() * c_star;
  }
};

/// Daily revenue of one more unit of capacity at `capacity`: the sum over
/// periods whose virtual reservation exceeds the capacity of
/// (marginal revenue of the reservation at C) - (rate), plus the overnight
/// term for the start-of-day charge.
double capacity_marginal_revenue(Cells capacity, const ReservationPolicy& policy,
                                 const TouScheme& scheme,
                                 std::span<const DiscreteDemand> demands);

struct SizingOptions {
  double tol = kDefaultPriceTolerance;
  // Number of evenly spaced grid capacities in the reported curve; 0 skips it.
  std::size_t curve_points = 0;
};

SizingResult optimal_capacity(const TouScheme& scheme, std::span<const DiscreteDemand> demands,
                              Price pi_s, const SizingOptions& options = {});

}  // namespace tou
