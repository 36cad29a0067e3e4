#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tou/demand.hpp"
#include "tou/policy.hpp"
#include "tou/tariff.hpp"

namespace tou {

// Backward-induction tables over incoming storage levels 0..C.
struct DpStage {
  std::vector<double> value;  // expected cost-to-go by incoming level
  // argmin[level][outcome]: chosen level after the period for the demand
  // outcome with that index in the period's support.
  std::vector<std::vector<Cells>> argmin;
};

struct DpTable {
  std::vector<DpStage> stages;
};

struct DpResult {
  double optimal_cost = 0.0;
  DpTable table;
};

inline constexpr double kMaxDpTriples = 1e7;

/// Exhaustive stochastic DP: the level after each period is chosen after
/// its demand is observed, subject to 0 <= r <= C and no negative purchase;
/// the day starts and ends full. Throws StateSpaceTooLarge when the number
/// of (state, action, outcome) triples exceeds kMaxDpTriples.
DpResult brute_force_dp(const TouScheme& scheme, std::span<const DiscreteDemand> demands,
                        Cells capacity);

struct SimulationReport {
  std::int64_t days = 0;
  double mean_cost = 0.0;     // cents per day
  double sd_cost = 0.0;
  double cv_cost = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal interval
  // (mean_cost - cost with every demand at its mean) / that cost.
  double cost_gap = 0.0;
};

/// Monte Carlo evaluation of `policy` at `capacity`. Demand is drawn by
/// inverse CDF from the discretized distributions; day d uses a stream
/// derived from (seed, d), so results do not depend on `threads`
/// (0 = default worker count).
SimulationReport simulate_policy(const ReservationPolicy& policy, Cells capacity,
                                 const TouScheme& scheme, std::span<const DiscreteDemand> demands,
                                 std::int64_t days, std::uint64_t seed, unsigned threads = 0);

}  // namespace tou
