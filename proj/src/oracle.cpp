#include "tou/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "tou/error.hpp"
#include "tou/parallel.hpp"

namespace tou {

namespace {

struct Outcome {
  Cells cells;
  double prob;
};

std::vector<Outcome> outcomes_of(const DiscreteDemand& d) {
  std::vector<Outcome> out;
  const auto& m = d.masses();
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] > 0.0) out.push_back({static_cast<Cells>(k), m[k]});
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

DpResult brute_force_dp(const TouScheme& scheme, std::span<const DiscreteDemand> demands,
                        Cells capacity) {
  const std::size_t n = scheme.size();
  if (demands.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "one demand distribution per period required");
  }
  for (const auto& d : demands) {
    if (!same_grid(d.step(), demands.front().step())) {
      throw Error(ErrorCode::GridMismatch, "demand distributions use different grid steps");
    }
  }
  if (capacity < 0) throw Error(ErrorCode::InvalidArgument, "negative capacity");

  std::vector<std::vector<Outcome>> outcomes;
  double triples = 0.0;
  const double states = static_cast<double>(capacity) + 1.0;
  for (const auto& d : demands) {
    outcomes.push_back(outcomes_of(d));
    triples += states * static_cast<double>(outcomes.back().size()) * states;
  }
  if (triples > kMaxDpTriples) {
    throw Error(ErrorCode::StateSpaceTooLarge,
                fmt::format("{:.3g} state-action-outcome triples exceed the limit {:.3g}", triples,
                            kMaxDpTriples));
  }

  const auto state_count = static_cast<std::size_t>(capacity) + 1;
  DpResult result;
  result.table.stages.resize(n);

  // Last period: refill to capacity whatever the demand.
  {
    auto& stage = result.table.stages[n - 1];
    const double rate = scheme.rate(n - 1).cents();
    stage.value.assign(state_count, 0.0);
    stage.argmin.assign(state_count, std::vector<Cells>(outcomes[n - 1].size(), capacity));
    for (std::size_t s = 0; s < state_count; ++s) {
      double v = 0.0;
      for (const auto& o : outcomes[n - 1]) {
        v += o.prob * rate * static_cast<double>(capacity + o.cells - static_cast<Cells>(s));
      }
      stage.value[s] = v;
    }
  }

  for (std::size_t k = n - 1; k-- > 0;) {
    auto& stage = result.table.stages[k];
    const auto& later = result.table.stages[k + 1].value;
    const double rate = scheme.rate(k).cents();
    stage.value.assign(state_count, 0.0);
    stage.argmin.assign(state_count, std::vector<Cells>(outcomes[k].size(), 0));
    for (std::size_t s = 0; s < state_count; ++s) {
      const Cells incoming = static_cast<Cells>(s);
      double v = 0.0;
      for (std::size_t o = 0; o < outcomes[k].size(); ++o) {
        const Cells x = outcomes[k][o].cells;
        double best = std::numeric_limits<double>::infinity();
        Cells best_r = capacity;
        for (Cells r = std::max<Cells>(0, incoming - x); r <= capacity; ++r) {
          const double c = rate * static_cast<double>(r + x - incoming) +
                           later[static_cast<std::size_t>(r)];
          if (c < best) {
            best = c;
            best_r = r;
          }
        }
        stage.argmin[s][o] = best_r;
        v += outcomes[k][o].prob * best;
      }
      stage.value[s] = v;
    }
  }

  const double step = demands.front().step();
  // Values above are in cents per cell; convert to cents.
  for (auto& stage : result.table.stages) {
    for (double& v : stage.value) v *= step;
  }
  result.optimal_cost = result.table.stages.front().value[static_cast<std::size_t>(capacity)];
  return result;
}

SimulationReport simulate_policy(const ReservationPolicy& policy, Cells capacity,
                                 const TouScheme& scheme, std::span<const DiscreteDemand> demands,
                                 std::int64_t days, std::uint64_t seed, unsigned threads) {
  const std::size_t n = scheme.size();
  if (days < 1) throw Error(ErrorCode::InvalidArgument, "simulation needs at least one day");
  if (policy.size() != n || demands.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "policy, tariff and demand sizes differ");
  }
  if (capacity < 0) throw Error(ErrorCode::InvalidArgument, "negative capacity");
  const auto targets = policy.projections(capacity);
  const auto rates = scheme.rates_cents();
  const double step = demands.front().step();

  std::vector<std::vector<double>> cdfs;
  for (const auto& d : demands) cdfs.push_back(d.cumulative());

  std::vector<double> costs(static_cast<std::size_t>(days));
  const auto run_day = [&](std::int64_t day) {
    std::mt19937_64 gen(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(day))));
    Cells level = capacity;
    double cost = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = static_cast<double>(gen() >> 11) * 0x1p-53;
      const auto& cdf = cdfs[k];
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      const Cells x = static_cast<Cells>(it - cdf.begin());
      const Cells next = std::max(targets[k], level - x);
      cost += rates[k] * static_cast<double>(next - level + x);
      level = next;
    }
    costs[static_cast<std::size_t>(day)] = cost * step;
  };

  constexpr std::int64_t kBlock = 4096;
  const auto blocks = static_cast<std::size_t>((days + kBlock - 1) / kBlock);
  parallel_for(
      blocks,
      [&](std::size_t b) {
        const auto begin = static_cast<std::int64_t>(b) * kBlock;
        const auto end = std::min(days, begin + kBlock);
        for (std::int64_t d = begin; d < end; ++d) run_day(d);
      },
      threads);

  SimulationReport report;
  report.days = days;
  double sum = 0.0;
  for (double c : costs) sum += c;
  report.mean_cost = sum / static_cast<double>(days);
  double ss = 0.0;
  for (double c : costs) ss += (c - report.mean_cost) * (c - report.mean_cost);
  report.sd_cost = days > 1 ? std::sqrt(ss / static_cast<double>(days - 1)) : 0.0;
  report.cv_cost = report.mean_cost > 0.0 ? report.sd_cost / report.mean_cost : 0.0;
  report.ci_halfwidth = 1.96 * report.sd_cost / std::sqrt(static_cast<double>(days));

  double level = static_cast<double>(capacity) * step;
  double mean_path_cost = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = demands[k].mean();
    const double next = std::max(static_cast<double>(targets[k]) * step, level - x);
    mean_path_cost += rates[k] * (next - level + x);
    level = next;
  }
  report.cost_gap = mean_path_cost > 0.0 ? (report.mean_cost - mean_path_cost) / mean_path_cost : 0.0;
  return report;
}

}  // namespace tou
