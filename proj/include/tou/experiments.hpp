#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tou/demand.hpp"
#include "tou/money.hpp"
#include "tou/oracle.hpp"
#include "tou/tariff.hpp"

namespace tou {

struct ExperimentConfig {
  TouScheme scheme;
  DemandSpec user;                     // one descriptor per period
  std::vector<double> cv_grid;         // positive, ascending
  std::vector<int> group_sizes;        // positive, ascending
  std::int64_t days = 0;               // Monte Carlo days per row; 0 skips simulation
  std::uint64_t seed = 1;
  Price pi_s = Price::from_units(200);
  double grid_step = 0.05;
  double tail_mass = 1e-6;
  // Size the constant-demand baseline on its own (true) or reuse the
  // random case's capacity (false).
  bool reoptimize_baseline = true;
};

/// Throws InvalidArgument on an inconsistent config.
void validate(const ExperimentConfig& config);

struct CvGapRow {
  double cv = 0.0;
  double cost_gap = 0.0;
  double total_cost = 0.0;     // operating + amortized storage, cents/day
  double baseline_cost = 0.0;
  double c_star = 0.0;
  SimulationReport simulation;
};

struct AggregationRow {
  int group_size = 0;
  double per_user_cost = 0.0;  // operating + amortized storage, cents/day
  double c_star = 0.0;
  double aggregate_cv = 0.0;   // of the daily total demand
  SimulationReport simulation;
};

/// Normalized cost gap between LogNormal demand at each CV (means taken
/// from the user's descriptors) and constant demand at the mean, each
/// evaluated at its optimal capacity. CV 0 is the baseline itself.
std::vector<CvGapRow> cv_cost_gap_experiment(const ExperimentConfig& config);

/// Per-user cost of k i.i.d. copies of the user sharing one optimally
/// sized storage.
std::vector<AggregationRow> aggregation_experiment(const ExperimentConfig& config);

}  // namespace tou
