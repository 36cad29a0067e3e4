#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tou/demand.hpp"
#include "tou/tariff.hpp"

namespace tou {

// Storage levels, reservations and capacities are integer multiples of the
// shared demand grid step ("cells").
using Cells = std::int64_t;

/// Charging threshold that every reachable level falls below.
inline constexpr Cells kAlwaysCharge = std::numeric_limits<Cells>::max() / 4;

/// Converts a grid-aligned energy to cells. Throws GridMismatch otherwise.
Cells to_cells(double energy_kwh, double step);

/// A capacity-free reservation target M*; Unbounded projects to C for every C.
class VirtualReservation {
 public:
  static VirtualReservation unbounded() { return VirtualReservation(kAlwaysCharge); }
  static VirtualReservation finite(Cells cells);

  bool is_unbounded() const { return cells_ == kAlwaysCharge; }
  Cells cells() const;  // throws on Unbounded
  Cells project(Cells capacity) const { return cells_ < capacity ? cells_ : capacity; }
  /// Charging threshold used when the capacity is not binding.
  Cells threshold() const { return cells_; }

  bool operator==(const VirtualReservation&) const = default;

 private:
  explicit VirtualReservation(Cells cells) : cells_(cells) {}
  Cells cells_;
};

struct ReservationPolicy {
  std::vector<VirtualReservation> virtual_reservations;
  double grid_step = 0.0;
  /// Identifies the (scheme, demands) pair the policy was computed from.
  std::uint64_t inputs_fingerprint = 0;

  std::size_t size() const { return virtual_reservations.size(); }
  /// N_i = min(M_i*, C) for every period.
  std::vector<Cells> projections(Cells capacity) const;
};

std::uint64_t fingerprint(const TouScheme& scheme, std::span<const DiscreteDemand> demands);

/// probs[k] is the probability that period first_period + k is the first
/// period after the reservation that needs a grid purchase.
struct ChargeTimingDistribution {
  std::size_t first_period = 0;
  std::vector<double> probs;
};

/// Reserving `level` at the end of `period`, with charging thresholds
/// `thresholds[k]` for the later periods (a period charges when the level
/// net of its demand falls strictly below its threshold; the last period
/// always charges). `thresholds` and `demands` are indexed by period.
ChargeTimingDistribution charge_timing_probs(std::size_t period, Cells level,
                                             std::span<const Cells> thresholds,
                                             std::span<const DiscreteDemand> demands);

/// Same, for a level held at the start of the day (before period 0).
ChargeTimingDistribution start_of_day_charge_timing(Cells level, std::span<const Cells> thresholds,
                                                    std::span<const DiscreteDemand> demands);

/// Expected saving per unit of reserving one more unit at the end of
/// `period`: sum over later periods j of rate_j * P_j.
double marginal_revenue(std::size_t period, Cells level, std::span<const Cells> thresholds,
                        std::span<const DiscreteDemand> demands, const TouScheme& scheme);

/// Charging thresholds implied by virtual reservations with no capacity limit.
std::vector<Cells> thresholds_of(std::span<const VirtualReservation> reservations);

inline constexpr double kDefaultPriceTolerance = 1e-6;

/// Optimal virtual reservation for `period` given the already solved
/// later entries of `reservations` (indexed by period; earlier entries are
/// ignored). Returns 0 when the next rate is not higher, Unbounded at
/// off-peak-rate periods, otherwise the smallest grid level whose marginal
/// revenue does not exceed the period's rate.
VirtualReservation solve_reservation(std::size_t period,
                                     std::span<const VirtualReservation> reservations,
                                     const TouScheme& scheme,
                                     std::span<const DiscreteDemand> demands,
                                     double tol = kDefaultPriceTolerance);

/// Backward pass over all periods; the last entry is Unbounded.
ReservationPolicy compute_policy(const TouScheme& scheme, std::span<const DiscreteDemand> demands,
                                 double tol = kDefaultPriceTolerance);

struct CostBreakdown {
  double total = 0.0;                          // cents
  std::vector<double> expected_purchase_kwh;   // per period
  std::vector<double> period_cost;             // cents, per period
};

/// Expected daily cost of operating `policy` with capacity `capacity`,
/// starting and ending the day full. Exact propagation of the storage
/// level distribution.
CostBreakdown expected_cost(const ReservationPolicy& policy, Cells capacity,
                            const TouScheme& scheme, std::span<const DiscreteDemand> demands);

/// Same with explicit reservations N_i (each in [0, capacity]); the last
/// period always refills to `capacity`.
CostBreakdown expected_cost_with_projections(std::span<const Cells> projections, Cells capacity,
                                             const TouScheme& scheme,
                                             std::span<const DiscreteDemand> demands);

/// Expected cost of periods after `period` when `level` is held at its end
/// and later periods top up to `projections` (the last entry is the final
/// refill target).
double cost_to_go(std::size_t period, Cells level, std::span<const Cells> projections,
                  const TouScheme& scheme, std::span<const DiscreteDemand> demands);

}  // namespace tou
