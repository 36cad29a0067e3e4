#include "tou/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "tou/error.hpp"

namespace tou {

namespace {

void check_inputs(std::size_t n, std::span<const DiscreteDemand> demands) {
  if (demands.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("{} demand distributions for {} periods", demands.size(), n));
  }
  for (const auto& d : demands) {
    if (!same_grid(d.step(), demands.front().step())) {
      throw Error(ErrorCode::GridMismatch, "demand distributions use different grid steps");
    }
  }
}

// Pr{X > k} for k = 0..max, accumulated from the top so small tails keep
// their relative precision.
std::vector<double> survival(const DiscreteDemand& d) {
  const auto& m = d.masses();
  std::vector<double> out(m.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = m.size(); k-- > 0;) {
    out[k] = acc;
    acc += m[k];
  }
  return out;
}

// Sub-distribution of the storage level over absolute cell indices.
struct LevelDistribution {
  std::vector<double> mass;
  Cells lo = 0;
  Cells hi = -1;  // empty when hi < lo

  explicit LevelDistribution(Cells size) : mass(static_cast<std::size_t>(size) + 1, 0.0) {}

  void place(Cells level, double p) {
    mass[static_cast<std::size_t>(level)] += p;
  }
  void reset_range() {
    lo = 0;
    hi = -1;
    for (Cells k = 0; k < static_cast<Cells>(mass.size()); ++k) {
      if (mass[static_cast<std::size_t>(k)] != 0.0) {
        if (hi < lo) lo = k;
        hi = k;
      }
    }
  }
  bool empty() const { return hi < lo; }
  double total() const {
    double acc = 0.0;
    for (Cells k = lo; k <= hi; ++k) acc += mass[static_cast<std::size_t>(k)];
    return acc;
  }
  double mean_cells() const {
    double acc = 0.0;
    for (Cells k = lo; k <= hi; ++k) acc += static_cast<double>(k) * mass[static_cast<std::size_t>(k)];
    return acc;
  }
};

ChargeTimingDistribution first_charge_from(std::size_t first, Cells level,
                                           std::span<const Cells> thresholds,
                                           std::span<const DiscreteDemand> demands) {
  const std::size_t n = demands.size();
  if (thresholds.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("{} thresholds for {} periods", thresholds.size(), n));
  }
  if (first >= n) throw Error(ErrorCode::IndexOutOfRange, "no period follows the reservation");
  if (level < 0) throw Error(ErrorCode::InvalidArgument, "negative reservation level");
  if (level >= kAlwaysCharge) throw Error(ErrorCode::InvalidArgument, "reservation level is unbounded");

  ChargeTimingDistribution out;
  out.first_period = first;
  out.probs.assign(n - first, 0.0);

  LevelDistribution dist(level);
  dist.place(level, 1.0);
  dist.lo = dist.hi = level;

  for (std::size_t k = first; k + 1 < n && !dist.empty(); ++k) {
    const Cells threshold = thresholds[k];
    const auto& m = demands[k].masses();
    const auto surv = survival(demands[k]);
    const Cells dmax = demands[k].max_cells();
    LevelDistribution next(dist.hi);
    double absorbed = 0.0;
    for (Cells l = dist.lo; l <= dist.hi; ++l) {
      const double p = dist.mass[static_cast<std::size_t>(l)];
      if (p == 0.0) continue;
      const Cells room = threshold >= kAlwaysCharge ? -1 : l - threshold;
      if (room < 0) {
        absorbed += p;
        continue;
      }
      const Cells xmax = std::min(room, dmax);
      double* dst = next.mass.data() + (l - xmax);
      for (Cells x = 0; x <= xmax; ++x) dst[xmax - x] += p * m[static_cast<std::size_t>(x)];
      absorbed += p * surv[static_cast<std::size_t>(xmax)];
    }
    out.probs[k - first] = absorbed;
    next.reset_range();
    dist = std::move(next);
  }
  out.probs.back() += dist.empty() ? 0.0 : dist.total();
  return out;
}

CostBreakdown forward_cost(std::size_t first, Cells start_level, std::span<const Cells> targets,
                           const std::vector<double>& rates,
                           std::span<const DiscreteDemand> demands) {
  const std::size_t n = demands.size();
  Cells top = start_level;
  for (std::size_t k = first; k < n; ++k) {
    if (targets[k] < 0 || targets[k] >= kAlwaysCharge) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("invalid reservation for period {}", k + 1));
    }
    top = std::max(top, targets[k]);
  }
  CostBreakdown out;
  out.expected_purchase_kwh.assign(n, 0.0);
  out.period_cost.assign(n, 0.0);

  LevelDistribution dist(top);
  dist.place(start_level, 1.0);
  dist.lo = dist.hi = start_level;
  const double step = demands.front().step();

  for (std::size_t k = first; k < n; ++k) {
    const Cells target = targets[k];
    const auto& m = demands[k].masses();
    const auto surv = survival(demands[k]);
    const Cells dmax = demands[k].max_cells();
    const double mean_before = dist.mean_cells();
    LevelDistribution next(top);
    for (Cells l = dist.lo; l <= dist.hi; ++l) {
      const double p = dist.mass[static_cast<std::size_t>(l)];
      if (p == 0.0) continue;
      const Cells room = l - target;
      if (room < 0) {
        next.place(target, p);
        continue;
      }
      const Cells xmax = std::min(room, dmax);
      double* dst = next.mass.data() + (l - xmax);
      for (Cells x = 0; x <= xmax; ++x) dst[xmax - x] += p * m[static_cast<std::size_t>(x)];
      next.place(target, p * surv[static_cast<std::size_t>(xmax)]);
    }
    next.reset_range();
    const double mean_after = next.mean_cells();
    const double purchase = (mean_after - mean_before) * step + demands[k].mean();
    out.expected_purchase_kwh[k] = purchase;
    out.period_cost[k] = rates[k] * purchase;
    out.total += out.period_cost[k];
    dist = std::move(next);
  }
  return out;
}

}  // namespace

Cells to_cells(double energy_kwh, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
  if (!(energy_kwh >= 0.0) || !std::isfinite(energy_kwh)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("energy {} must be finite and >= 0", energy_kwh));
  }
  const double r = energy_kwh / step;
  const auto k = std::llround(r);
  if (std::abs(r - static_cast<double>(k)) > 1e-6) {
    throw Error(ErrorCode::GridMismatch,
                fmt::format("{} kWh is not a multiple of the grid step {}", energy_kwh, step));
  }
  return k;
}

VirtualReservation VirtualReservation::finite(Cells cells) {
  if (cells < 0 || cells >= kAlwaysCharge) {
    throw Error(ErrorCode::InvalidArgument, "finite reservation out of range");
  }
  return VirtualReservation(cells);
}

Cells VirtualReservation::cells() const {
  if (is_unbounded()) throw Error(ErrorCode::InvalidArgument, "reservation is unbounded");
  return cells_;
}

std::vector<Cells> ReservationPolicy::projections(Cells capacity) const {
  std::vector<Cells> out;
  out.reserve(virtual_reservations.size());
  for (const auto& r : virtual_reservations) out.push_back(r.project(capacity));
  return out;
}

std::uint64_t fingerprint(const TouScheme& scheme, std::span<const DiscreteDemand> demands) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : scheme.periods()) mix(static_cast<std::uint64_t>(p.rate.units()));
  for (const auto& d : demands) {
    mix(std::bit_cast<std::uint64_t>(d.step()));
    mix(d.masses().size());
    for (double m : d.masses()) mix(std::bit_cast<std::uint64_t>(m));
  }
  return h;
}

ChargeTimingDistribution charge_timing_probs(std::size_t period, Cells level,
                                             std::span<const Cells> thresholds,
                                             std::span<const DiscreteDemand> demands) {
  if (period + 1 >= demands.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                fmt::format("period {} has no successor among {} periods", period + 1, demands.size()));
  }
  check_inputs(demands.size(), demands);
  return first_charge_from(period + 1, level, thresholds, demands);
}

ChargeTimingDistribution start_of_day_charge_timing(Cells level, std::span<const Cells> thresholds,
                                                    std::span<const DiscreteDemand> demands) {
  check_inputs(demands.size(), demands);
  return first_charge_from(0, level, thresholds, demands);
}

double marginal_revenue(std::size_t period, Cells level, std::span<const Cells> thresholds,
                        std::span<const DiscreteDemand> demands, const TouScheme& scheme) {
  check_inputs(scheme.size(), demands);
  const auto timing = charge_timing_probs(period, level, thresholds, demands);
  double acc = 0.0;
  for (std::size_t k = 0; k < timing.probs.size(); ++k) {
    acc += scheme.rate(timing.first_period + k).cents() * timing.probs[k];
  }
  return acc;
}

std::vector<Cells> thresholds_of(std::span<const VirtualReservation> reservations) {
  std::vector<Cells> out;
  out.reserve(reservations.size());
  for (const auto& r : reservations) out.push_back(r.threshold());
  return out;
}

VirtualReservation solve_reservation(std::size_t period,
                                     std::span<const VirtualReservation> reservations,
                                     const TouScheme& scheme,
                                     std::span<const DiscreteDemand> demands, double tol) {
  const std::size_t n = scheme.size();
  check_inputs(n, demands);
  if (reservations.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "reservation vector does not match the period count");
  }
  if (period + 1 >= n) {
    throw Error(ErrorCode::IndexOutOfRange, "the last period always refills to capacity");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");

  const Price rate = scheme.rate(period);
  if (rate >= scheme.rate(period + 1)) return VirtualReservation::finite(0);

  const auto thresholds = thresholds_of(reservations);
  Cells upper = 0;
  for (std::size_t t = period + 1; t < n; ++t) upper += demands[t].max_cells();

  const double target = rate.cents() + tol;
  const auto mr = [&](Cells level) {
    return marginal_revenue(period, level, thresholds, demands, scheme);
  };

  Cells lo = 0;
  double mr_lo = mr(0);
  if (mr_lo <= target) return VirtualReservation::finite(0);
  Cells hi = upper;
  double mr_hi = mr(upper);
  if (mr_hi > target) return VirtualReservation::unbounded();
  if (mr_hi > mr_lo + tol) {
    throw Error(ErrorCode::NotMonotone,
                fmt::format("period {}: marginal revenue rises from {} to {}", period + 1, mr_lo, mr_hi));
  }
  while (hi - lo > 1) {
    const Cells mid = lo + (hi - lo) / 2;
    const double v = mr(mid);
    if (v > mr_lo + tol || v < mr_hi - tol) {
      throw Error(ErrorCode::NotMonotone,
                  fmt::format("period {}: marginal revenue {} at level {} outside [{}, {}]",
                              period + 1, v, mid, mr_hi, mr_lo));
    }
    if (v <= target) {
      hi = mid;
      mr_hi = v;
    } else {
      lo = mid;
      mr_lo = v;
    }
  }
  return VirtualReservation::finite(hi);
}

ReservationPolicy compute_policy(const TouScheme& scheme, std::span<const DiscreteDemand> demands,
                                 double tol) {
  const std::size_t n = scheme.size();
  check_inputs(n, demands);
  ReservationPolicy policy;
  policy.virtual_reservations.assign(n, VirtualReservation::unbounded());
  policy.grid_step = demands.front().step();
  for (std::size_t i = n - 1; i-- > 0;) {
    policy.virtual_reservations[i] =
        solve_reservation(i, policy.virtual_reservations, scheme, demands, tol);
  }
  policy.inputs_fingerprint = fingerprint(scheme, demands);
  return policy;
}

CostBreakdown expected_cost(const ReservationPolicy& policy, Cells capacity,
                            const TouScheme& scheme, std::span<const DiscreteDemand> demands) {
  check_inputs(scheme.size(), demands);
  if (policy.size() != scheme.size() || policy.inputs_fingerprint != fingerprint(scheme, demands)) {
    throw Error(ErrorCode::InvalidArgument, "policy was computed for different inputs");
  }
  const auto n_proj = policy.projections(capacity);
  return expected_cost_with_projections(n_proj, capacity, scheme, demands);
}

CostBreakdown expected_cost_with_projections(std::span<const Cells> projections, Cells capacity,
                                             const TouScheme& scheme,
                                             std::span<const DiscreteDemand> demands) {
  const std::size_t n = scheme.size();
  check_inputs(n, demands);
  if (capacity < 0 || capacity >= kAlwaysCharge) {
    throw Error(ErrorCode::InvalidArgument, "capacity out of range");
  }
  if (projections.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "projection vector does not match the period count");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (projections[k] < 0 || projections[k] > capacity) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("reservation for period {} outside [0, capacity]", k + 1));
    }
  }
  if (projections.back() != capacity) {
    throw Error(ErrorCode::InvalidArgument, "the last period must refill to capacity");
  }
  return forward_cost(0, capacity, projections, scheme.rates_cents(), demands);
}

double cost_to_go(std::size_t period, Cells level, std::span<const Cells> projections,
                  const TouScheme& scheme, std::span<const DiscreteDemand> demands) {
  const std::size_t n = scheme.size();
  check_inputs(n, demands);
  if (period + 1 >= n) throw Error(ErrorCode::IndexOutOfRange, "no period follows the reservation");
  if (projections.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "projection vector does not match the period count");
  }
  if (level < 0) throw Error(ErrorCode::InvalidArgument, "negative level");
  return forward_cost(period + 1, level, projections, scheme.rates_cents(), demands).total;
}

}  // namespace tou
