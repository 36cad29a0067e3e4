#include "tou/experiments.hpp"

#include <fmt/format.h>

#include "tou/error.hpp"
#include "tou/parallel.hpp"
#include "tou/policy.hpp"
#include "tou/sizing.hpp"

namespace tou {

namespace {

std::uint64_t row_seed(std::uint64_t seed, std::size_t row) {
  return seed * 0x100000001b3ULL + static_cast<std::uint64_t>(row) * 0x9e3779b97f4a7c15ULL;
}

DemandSpec constant_at_means(const DemandSpec& user) {
  DemandSpec out;
  for (const auto& d : user) out.push_back(PointMass{descriptor_mean(d)});
  return out;
}

}  // namespace

void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (c.user.size() != c.scheme.size()) {
    fail(fmt::format("user has {} demand descriptors for {} tariff periods", c.user.size(),
                     c.scheme.size()));
  }
  for (std::size_t k = 0; k < c.cv_grid.size(); ++k) {
    if (!(c.cv_grid[k] >= 0.0)) fail("cv_grid entries must be nonnegative");
    if (k > 0 && !(c.cv_grid[k] > c.cv_grid[k - 1])) fail("cv_grid must be strictly ascending");
  }
  for (std::size_t k = 0; k < c.group_sizes.size(); ++k) {
    if (c.group_sizes[k] < 1) fail("group sizes must be positive");
    if (k > 0 && c.group_sizes[k] <= c.group_sizes[k - 1]) fail("group sizes must be strictly ascending");
  }
  if (c.days < 0) fail("days must be nonnegative");
  if (c.pi_s.units() <= 0) fail("amortized cost must be positive");
  if (!(c.grid_step > 0.0)) fail("grid step must be positive");
}

std::vector<CvGapRow> cv_cost_gap_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto baseline_spec = constant_at_means(config.user);
  const auto baseline_demand = discretize(baseline_spec, config.grid_step, config.tail_mass);
  const auto baseline = optimal_capacity(config.scheme, baseline_demand, config.pi_s);

  std::vector<CvGapRow> rows(config.cv_grid.size());
  parallel_for(rows.size(), [&](std::size_t r) {
    const double level = config.cv_grid[r];
    DemandSpec spec;
    if (level == 0.0) {
      spec = baseline_spec;
    } else {
      for (const auto& d : config.user) spec.push_back(LogNormal{descriptor_mean(d), level});
    }
    const auto demand = discretize(spec, config.grid_step, config.tail_mass);
    const auto sized = optimal_capacity(config.scheme, demand, config.pi_s);

    CvGapRow row;
    row.cv = level;
    row.c_star = sized.c_star;
    row.total_cost = sized.total_daily_cost();
    if (config.reoptimize_baseline) {
      row.baseline_cost = baseline.total_daily_cost();
    } else {
      row.baseline_cost =
          expected_cost(baseline.policy, sized.c_star_cells, config.scheme, baseline_demand).total +
          config.pi_s.cents() * sized.c_star;
    }
    row.cost_gap = level == 0.0 && config.reoptimize_baseline
                       ? 0.0
                       : (row.total_cost - row.baseline_cost) / row.baseline_cost;
    if (config.days > 0) {
      row.simulation = simulate_policy(sized.policy, sized.c_star_cells, config.scheme, demand,
                                       config.days, row_seed(config.seed, r), 1);
    }
    rows[r] = row;
  });
  return rows;
}

std::vector<AggregationRow> aggregation_experiment(const ExperimentConfig& config) {
  validate(config);
  std::vector<AggregationRow> rows(config.group_sizes.size());
  parallel_for(rows.size(), [&](std::size_t r) {
    const int k = config.group_sizes[r];
    const std::vector<DemandSpec> users(static_cast<std::size_t>(k), config.user);
    const auto demand = aggregate_users(users, config.grid_step, config.tail_mass);
    const auto sized = optimal_capacity(config.scheme, demand, config.pi_s);

    AggregationRow row;
    row.group_size = k;
    row.c_star = sized.c_star;
    row.per_user_cost = sized.total_daily_cost() / k;
    DiscreteDemand daily = demand.front();
    for (std::size_t p = 1; p < demand.size(); ++p) daily = convolve(daily, demand[p]);
    row.aggregate_cv = cv(daily);
    if (config.days > 0) {
      row.simulation = simulate_policy(sized.policy, sized.c_star_cells, config.scheme, demand,
                                       config.days, row_seed(config.seed, r), 1);
    }
    rows[r] = row;
  });
  return rows;
}

}  // namespace tou
