#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace tou {

// Parametric per-period demand descriptors (kWh).
struct Exponential {
  double mean = 1.0;
};
struct LogNormal {
  double mean = 1.0;
  double cv = 0.5;
};
// Normal(mean, sd) conditioned on being nonnegative; mean and sd are the
// parameters of the parent normal.
struct TruncatedNormal {
  double mean = 1.0;
  double sd = 0.5;
};
struct PointMass {
  double value = 0.0;
};
// Piecewise-uniform density; masses need not be normalized.
struct EmpiricalHistogram {
  std::vector<double> bin_edges;
  std::vector<double> masses;
};

using DemandDescriptor =
    std::variant<Exponential, LogNormal, TruncatedNormal, PointMass, EmpiricalHistogram>;

/// One descriptor per tariff period.
using DemandSpec = std::vector<DemandDescriptor>;

/// Mean of the parametric descriptor, before discretization.
double descriptor_mean(const DemandDescriptor& d);

/// Probability masses on the energy grid {0, step, 2*step, ...}. Index k
/// is the demand k*step; for discretized densities it carries the mass of
/// the cell [(k - 1/2)*step, (k + 1/2)*step).
class DiscreteDemand {
 public:
  static constexpr double kMassTolerance = 1e-9;

  DiscreteDemand(double step, std::vector<double> masses);

  static DiscreteDemand point(double step, std::int64_t cells);

  double step() const { return step_; }
  const std::vector<double>& masses() const { return masses_; }
  double mass(std::int64_t k) const {
    return k >= 0 && k < static_cast<std::int64_t>(masses_.size()) ? masses_[k] : 0.0;
  }
  /// Largest cell index with positive mass.
  std::int64_t max_cells() const { return static_cast<std::int64_t>(masses_.size()) - 1; }
  double max_value() const { return max_cells() * step_; }

  double total_mass() const;
  double mean() const;
  double variance() const;
  double sd() const;

  /// Pr{X <= k * step}.
  std::vector<double> cumulative() const;

  /// Folds the mass above the (1 - tail_mass) quantile into the cell at
  /// that quantile.
  DiscreteDemand truncated(double tail_mass) const;

 private:
  double step_;
  std::vector<double> masses_;
};

bool same_grid(double step_a, double step_b);

/// Cell masses from CDF differences, with the tail beyond the
/// (1 - tail_mass) quantile folded into the last cell. Point masses land on
/// the nearest grid point. Throws DegenerateGrid when the step exceeds the
/// truncation quantile of a non-degenerate distribution.
DiscreteDemand discretize(const DemandDescriptor& spec, double grid_step, double tail_mass);

std::vector<DiscreteDemand> discretize(const DemandSpec& spec, double grid_step, double tail_mass);

/// Distribution of the sum of two independent demands on the same grid.
DiscreteDemand convolve(const DiscreteDemand& a, const DiscreteDemand& b);

/// Coefficient of variation sd/mean. Throws ZeroMean.
double cv(const DiscreteDemand& d);

/// Per-period distribution of the summed demand of independent users.
/// Each aggregate is re-truncated at the (1 - tail_mass) quantile so its
/// support stays proportional to its spread rather than to the user count.
std::vector<DiscreteDemand> aggregate_users(std::span<const DemandSpec> users, double grid_step,
                                            double tail_mass);

}  // namespace tou
