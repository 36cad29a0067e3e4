#include "tou/demand.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "tou/error.hpp"

namespace tou {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Continuous CDF of a non-degenerate descriptor, plus its mean for bracketing.
struct ContinuousLaw {
  std::function<double(double)> cdf;
  double scale = 1.0;
};

ContinuousLaw law_of(const DemandDescriptor& spec) {
  return std::visit(
      [](const auto& d) -> ContinuousLaw {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          if (!(d.mean > 0.0)) throw Error(ErrorCode::InvalidArgument, "exponential mean must be > 0");
          const double m = d.mean;
          return {[m](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x / m); }, m};
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          if (!(d.mean > 0.0) || !(d.cv > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "lognormal needs mean > 0 and cv > 0");
          }
          const double s2 = std::log1p(d.cv * d.cv);
          const double s = std::sqrt(s2);
          const double mu = std::log(d.mean) - 0.5 * s2;
          return {[mu, s](double x) { return x <= 0.0 ? 0.0 : normal_cdf((std::log(x) - mu) / s); },
                  d.mean};
        } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
          if (!(d.sd > 0.0)) throw Error(ErrorCode::InvalidArgument, "truncated normal needs sd > 0");
          const double mu = d.mean;
          const double sd = d.sd;
          const double below = normal_cdf(-mu / sd);
          if (!(below < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "truncated normal has no mass above zero");
          }
          return {[mu, sd, below](double x) {
                    return x <= 0.0 ? 0.0 : (normal_cdf((x - mu) / sd) - below) / (1.0 - below);
                  },
                  std::max(std::abs(mu), sd)};
        } else if constexpr (std::is_same_v<T, EmpiricalHistogram>) {
          const auto& e = d.bin_edges;
          const auto& m = d.masses;
          if (e.size() < 2 || m.size() + 1 != e.size()) {
            throw Error(ErrorCode::InvalidArgument, "histogram needs bins+1 edges");
          }
          if (e.front() < 0.0) throw Error(ErrorCode::InvalidArgument, "histogram edges must be >= 0");
          for (std::size_t k = 1; k < e.size(); ++k) {
            if (!(e[k] > e[k - 1])) {
              throw Error(ErrorCode::InvalidArgument, "histogram edges must be increasing");
            }
          }
          double total = 0.0;
          for (double w : m) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
              throw Error(ErrorCode::InvalidArgument, "histogram masses must be finite and >= 0");
            }
            total += w;
          }
          if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "histogram has no mass");
          std::vector<double> cum(e.size(), 0.0);
          for (std::size_t k = 0; k < m.size(); ++k) cum[k + 1] = cum[k] + m[k] / total;
          return {[e, cum](double x) {
                    if (x <= e.front()) return 0.0;
                    if (x >= e.back()) return 1.0;
                    const auto it = std::upper_bound(e.begin(), e.end(), x);
                    const std::size_t k = static_cast<std::size_t>(it - e.begin()) - 1;
                    const double frac = (x - e[k]) / (e[k + 1] - e[k]);
                    return cum[k] + frac * (cum[k + 1] - cum[k]);
                  },
                  e.back()};
        } else {
          throw Error(ErrorCode::InvalidArgument, "point mass has no continuous law");
        }
      },
      spec);
}

double quantile(const ContinuousLaw& law, double p) {
  double hi = std::max(law.scale, 1e-12);
  while (law.cdf(hi) < p) {
    hi *= 2.0;
    if (hi > 1e15) throw Error(ErrorCode::InvalidArgument, "distribution tail does not decay");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (law.cdf(mid) < p) lo = mid; else hi = mid;
  }
  return hi;
}

}  // namespace

double descriptor_mean(const DemandDescriptor& spec) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
          const double a = -d.mean / d.sd;
          const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
          return d.mean + d.sd * pdf / (1.0 - normal_cdf(a));
        } else if constexpr (std::is_same_v<T, EmpiricalHistogram>) {
          double total = 0.0, acc = 0.0;
          for (std::size_t k = 0; k < d.masses.size(); ++k) {
            total += d.masses[k];
            acc += d.masses[k] * 0.5 * (d.bin_edges[k] + d.bin_edges[k + 1]);
          }
          return acc / total;
        } else {
          return d.mean;
        }
      },
      spec);
}

bool same_grid(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

DiscreteDemand::DiscreteDemand(double step, std::vector<double> masses)
    : step_(step), masses_(std::move(masses)) {
  if (!(step_ > 0.0) || !std::isfinite(step_)) {
    throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
  }
  if (masses_.empty()) throw Error(ErrorCode::InvalidArgument, "demand has no cells");
  double total = 0.0;
  for (double m : masses_) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw Error(ErrorCode::InvalidArgument, "demand masses must be finite and nonnegative");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("demand masses sum to {}", total));
  }
  while (masses_.size() > 1 && masses_.back() == 0.0) masses_.pop_back();
}

DiscreteDemand DiscreteDemand::point(double step, std::int64_t cells) {
  if (cells < 0) throw Error(ErrorCode::InvalidArgument, "point mass must be nonnegative");
  std::vector<double> m(static_cast<std::size_t>(cells) + 1, 0.0);
  m.back() = 1.0;
  return DiscreteDemand(step, std::move(m));
}

double DiscreteDemand::total_mass() const {
  return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

double DiscreteDemand::mean() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < masses_.size(); ++k) acc += static_cast<double>(k) * masses_[k];
  return acc * step_;
}

double DiscreteDemand::variance() const {
  const double mu = mean();
  double acc = 0.0;
  for (std::size_t k = 0; k < masses_.size(); ++k) {
    const double dx = static_cast<double>(k) * step_ - mu;
    acc += dx * dx * masses_[k];
  }
  return acc;
}

double DiscreteDemand::sd() const { return std::sqrt(variance()); }

std::vector<double> DiscreteDemand::cumulative() const {
  std::vector<double> out(masses_.size());
  std::partial_sum(masses_.begin(), masses_.end(), out.begin());
  return out;
}

DiscreteDemand DiscreteDemand::truncated(double tail_mass) const {
  double acc = 0.0;
  std::size_t cut = masses_.size() - 1;
  for (std::size_t k = 0; k < masses_.size(); ++k) {
    acc += masses_[k];
    if (acc >= 1.0 - tail_mass) {
      cut = k;
      break;
    }
  }
  if (cut + 1 >= masses_.size()) return *this;
  std::vector<double> m(masses_.begin(), masses_.begin() + static_cast<std::ptrdiff_t>(cut) + 1);
  double rest = 0.0;
  for (std::size_t k = cut + 1; k < masses_.size(); ++k) rest += masses_[k];
  m.back() += rest;
  return DiscreteDemand(step_, std::move(m));
}

DiscreteDemand discretize(const DemandDescriptor& spec, double grid_step, double tail_mass) {
  if (!(grid_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
  if (!(tail_mass > 0.0) || tail_mass > 1e-4) {
    throw Error(ErrorCode::InvalidArgument, "tail mass must lie in (0, 1e-4]");
  }
  if (const auto* pm = std::get_if<PointMass>(&spec)) {
    if (!(pm->value >= 0.0) || !std::isfinite(pm->value)) {
      throw Error(ErrorCode::InvalidArgument, "point mass must be finite and nonnegative");
    }
    return DiscreteDemand::point(grid_step, std::llround(pm->value / grid_step));
  }
  const auto law = law_of(spec);
  const double q = quantile(law, 1.0 - tail_mass);
  if (grid_step > q) {
    throw Error(ErrorCode::DegenerateGrid,
                fmt::format("grid step {} exceeds the {} quantile {}", grid_step, 1.0 - tail_mass, q));
  }
  const auto last = static_cast<std::size_t>(std::llround(q / grid_step));
  std::vector<double> m(last + 1, 0.0);
  double prev = 0.0;
  for (std::size_t k = 0; k < last; ++k) {
    const double upper = law.cdf((static_cast<double>(k) + 0.5) * grid_step);
    m[k] = std::max(0.0, upper - prev);
    prev = upper;
  }
  m[last] = std::max(0.0, 1.0 - prev);
  return DiscreteDemand(grid_step, std::move(m));
}

std::vector<DiscreteDemand> discretize(const DemandSpec& spec, double grid_step, double tail_mass) {
  std::vector<DiscreteDemand> out;
  out.reserve(spec.size());
  for (const auto& d : spec) out.push_back(discretize(d, grid_step, tail_mass));
  return out;
}

DiscreteDemand convolve(const DiscreteDemand& a, const DiscreteDemand& b) {
  if (!same_grid(a.step(), b.step())) {
    throw Error(ErrorCode::GridMismatch,
                fmt::format("cannot convolve grids {} and {}", a.step(), b.step()));
  }
  const auto& x = a.masses();
  const auto& y = b.masses();
  std::vector<double> out(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    const double xi = x[i];
    double* dst = out.data() + i;
    for (std::size_t j = 0; j < y.size(); ++j) dst[j] += xi * y[j];
  }
  // Re-normalize away the rounding drift of long products.
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= total;
  return DiscreteDemand(a.step(), std::move(out));
}

double cv(const DiscreteDemand& d) {
  const double mu = d.mean();
  if (!(mu > 0.0)) throw Error(ErrorCode::ZeroMean, "coefficient of variation needs a positive mean");
  return d.sd() / mu;
}

std::vector<DiscreteDemand> aggregate_users(std::span<const DemandSpec> users, double grid_step,
                                            double tail_mass) {
  if (users.empty()) throw Error(ErrorCode::InvalidArgument, "no users to aggregate");
  const std::size_t n = users.front().size();
  for (const auto& u : users) {
    if (u.size() != n) {
      throw Error(ErrorCode::InvalidArgument, "users have different numbers of periods");
    }
  }
  std::vector<DiscreteDemand> out;
  out.reserve(n);
  for (std::size_t p = 0; p < n; ++p) {
    DiscreteDemand acc = discretize(users.front()[p], grid_step, tail_mass);
    for (std::size_t u = 1; u < users.size(); ++u) {
      acc = convolve(acc, discretize(users[u][p], grid_step, tail_mass)).truncated(tail_mass);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace tou
