#include "tou/sizing.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "tou/error.hpp"
#include "tou/parallel.hpp"

namespace tou {

double capacity_marginal_revenue(Cells capacity, const ReservationPolicy& policy,
                                 const TouScheme& scheme,
                                 std::span<const DiscreteDemand> demands) {
  const std::size_t n = scheme.size();
  if (policy.size() != n || demands.size() != n ||
      policy.inputs_fingerprint != fingerprint(scheme, demands)) {
    throw Error(ErrorCode::InvalidArgument, "policy was computed for different inputs");
  }
  if (capacity < 0) throw Error(ErrorCode::InvalidArgument, "negative capacity");

  // Periods whose reservation the capacity cuts off refill to C on every
  // path, so an extra unit carried into them always charges there.
  std::vector<Cells> thresholds(n);
  std::vector<bool> binding(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = policy.virtual_reservations[k];
    binding[k] = r.is_unbounded() || r.cells() > capacity;
    thresholds[k] = binding[k] ? kAlwaysCharge : r.cells();
  }

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!binding[i]) continue;
    total += marginal_revenue(i, capacity, thresholds, demands, scheme) - scheme.rate(i).cents();
  }
  // Overnight term: the unit charged in the last period serves the next day.
  const auto timing = start_of_day_charge_timing(capacity, thresholds, demands);
  double wrap = 0.0;
  for (std::size_t k = 0; k < timing.probs.size(); ++k) {
    wrap += scheme.rate(timing.first_period + k).cents() * timing.probs[k];
  }
  total += wrap - scheme.off_peak_rate().cents();
  return total;
}

SizingResult optimal_capacity(const TouScheme& scheme, std::span<const DiscreteDemand> demands,
                              Price pi_s, const SizingOptions& options) {
  if (pi_s.units() <= 0) throw Error(ErrorCode::InvalidArgument, "amortized cost must be positive");
  SizingResult result;
  result.pi_s = pi_s;
  result.pi_max = pi_max(scheme);
  result.policy = compute_policy(scheme, demands, options.tol);
  const auto& policy = result.policy;
  const double step = policy.grid_step;

  Cells upper = 0;
  Cells daily_support = 0;
  bool unbounded_inner = false;
  for (std::size_t k = 0; k < policy.size(); ++k) {
    const auto& r = policy.virtual_reservations[k];
    if (r.is_unbounded()) {
      unbounded_inner = unbounded_inner || k + 1 < policy.size();
    } else {
      upper = std::max(upper, r.cells());
    }
    daily_support += demands[k].max_cells();
  }
  upper = std::max(upper, daily_support);
  if (unbounded_inner) {
    result.warnings.push_back(
        "off-peak-rate periods inside the day have unbounded reservations; capacity search capped "
        "at the daily demand support");
  }
  result.search_upper_bound = upper;

  const auto mr = [&](Cells c) { return capacity_marginal_revenue(c, policy, scheme, demands); };
  result.expected_daily_cost_without_storage = expected_cost(policy, 0, scheme, demands).total;

  Cells c_star = 0;
  if (pi_s <= result.pi_max) {
    result.feasible = true;
    const double target = pi_s.cents() + options.tol;
    Cells lo = 0;
    double mr_lo = mr(0);
    if (mr_lo > target) {
      Cells hi = upper;
      double mr_hi = mr(upper);
      if (mr_hi > target) {
        throw Error(ErrorCode::NotMonotone,
                    fmt::format("marginal revenue {} still above {} at the search bound", mr_hi,
                                pi_s.cents()));
      }
      while (hi - lo > 1) {
        const Cells mid = lo + (hi - lo) / 2;
        const double v = mr(mid);
        if (v > mr_lo + options.tol || v < mr_hi - options.tol) {
          throw Error(ErrorCode::NotMonotone,
                      fmt::format("capacity marginal revenue {} at {} cells outside [{}, {}]", v,
                                  mid, mr_hi, mr_lo));
        }
        if (v <= target) {
          hi = mid;
          mr_hi = v;
        } else {
          lo = mid;
          mr_lo = v;
        }
      }
      c_star = hi;
      result.mr_below_c_star = mr_lo;
      result.mr_at_c_star = mr_hi;
    } else {
      result.mr_at_c_star = mr_lo;
    }
  } else {
    result.mr_at_c_star = mr(0);
  }
  result.c_star_cells = c_star;
  result.c_star = static_cast<double>(c_star) * step;
  result.expected_daily_cost_at_c_star =
      c_star == 0 ? result.expected_daily_cost_without_storage
                  : expected_cost(policy, c_star, scheme, demands).total;

  if (options.curve_points > 0) {
    const std::size_t points = std::max<std::size_t>(options.curve_points, 2);
    result.mr_curve.resize(points);
    parallel_for(points, [&](std::size_t k) {
      const Cells c = static_cast<Cells>(
          (static_cast<long double>(upper) * k) / static_cast<long double>(points - 1) + 0.5L);
      result.mr_curve[k] = {static_cast<double>(c) * step, mr(c)};
    });
  }
  return result;
}

}  // namespace tou
