#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "tou/error.hpp"
#include "tou/policy.hpp"

using namespace tou;
using doctest::Approx;
using tou::testing::scheme_from_rates;

namespace {

constexpr double kStep = 0.01;

std::vector<DiscreteDemand> exp_demands(std::size_t n, double mean = 1.0) {
  std::vector<DiscreteDemand> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(discretize(Exponential{mean}, kStep, 1e-6));
  return out;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("charge timing on the single-peak exponential instance") {
  const auto scheme = scheme_from_rates({1000, 2000, 500});
  const auto demands = exp_demands(3);
  const std::vector<Cells> thresholds{0, 0, kAlwaysCharge};
  const Cells m = std::llround(std::log(3.0) / kStep);
  const auto t = charge_timing_probs(0, m, thresholds, demands);
  REQUIRE(t.first_period == 1);
  REQUIRE(t.probs.size() == 2);
  CHECK(std::abs(t.probs[0] - 1.0 / 3.0) <= 5e-3);
  CHECK(std::abs(t.probs[1] - 2.0 / 3.0) <= 5e-3);
  CHECK(std::abs(sum(t.probs) - 1.0) <= 1e-9);

  // Independent sampler from the continuous exponential: Pr{X_2 > M}.
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> x(1.0);
  int above = 0;
  constexpr int kDraws = 200000;
  for (int k = 0; k < kDraws; ++k) above += x(gen) > m * kStep;
  CHECK(std::abs(t.probs[0] - static_cast<double>(above) / kDraws) <= 5e-3);

  const double mr = marginal_revenue(0, m, thresholds, demands, scheme);
  CHECK(std::abs(mr - 10.0) <= 0.05);
}

TEST_CASE("zero reservation charges in the next period") {
  const auto scheme = scheme_from_rates({1000, 2000, 1500, 500});
  std::vector<DiscreteDemand> demands{DiscreteDemand::point(kStep, 10), DiscreteDemand::point(kStep, 30),
                                      discretize(Exponential{1.0}, kStep, 1e-6),
                                      DiscreteDemand::point(kStep, 5)};
  const std::vector<Cells> thresholds{0, 0, 0, kAlwaysCharge};
  const auto t = charge_timing_probs(0, 0, thresholds, demands);
  CHECK(t.probs[0] == Approx(1.0));
  CHECK(t.probs[1] == 0.0);
  CHECK(t.probs[2] == 0.0);
  CHECK(marginal_revenue(0, 0, thresholds, demands, scheme) == Approx(20.0));
  // Far beyond the demand support everything waits for the overnight refill.
  CHECK(marginal_revenue(0, 100000, thresholds, demands, scheme) == Approx(5.0));
}

TEST_CASE("charge timing from the start of the day covers every period") {
  const auto demands = exp_demands(3);
  const auto t = start_of_day_charge_timing(50, std::vector<Cells>{0, 0, kAlwaysCharge}, demands);
  CHECK(t.first_period == 0);
  CHECK(t.probs.size() == 3);
  CHECK(std::abs(sum(t.probs) - 1.0) <= 1e-9);
}

TEST_CASE("charge timing argument errors") {
  const auto demands = exp_demands(3);
  CHECK_THROWS_AS(charge_timing_probs(2, 0, std::vector<Cells>{0, 0, 0}, demands), Error);
  CHECK_THROWS_AS(charge_timing_probs(0, 0, std::vector<Cells>{0, 0}, demands), Error);
  std::vector<DiscreteDemand> mixed{demands[0], DiscreteDemand::point(0.5, 1), demands[2]};
  try {
    charge_timing_probs(0, 0, std::vector<Cells>{0, 0, 0}, mixed);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("solve_reservation") {
  SUBCASE("rate not rising returns zero") {
    const auto scheme = scheme_from_rates({2000, 1000, 500});
    const auto demands = exp_demands(3);
    std::vector<VirtualReservation> r(3, VirtualReservation::unbounded());
    CHECK(solve_reservation(0, r, scheme, demands) == VirtualReservation::finite(0));
  }
  SUBCASE("exponential closed form: ln 3") {
    const auto scheme = scheme_from_rates({1000, 2000, 500});
    const auto demands = exp_demands(3);
    std::vector<VirtualReservation> r(3, VirtualReservation::unbounded());
    r[1] = solve_reservation(1, r, scheme, demands);
    CHECK(r[1] == VirtualReservation::finite(0));
    const auto m = solve_reservation(0, r, scheme, demands);
    REQUIRE_FALSE(m.is_unbounded());
    CHECK(std::abs(m.cells() * kStep - std::log(3.0)) <= 2 * kStep);
  }
  SUBCASE("point mass: the jump location") {
    const auto scheme = scheme_from_rates({800, 1200, 500});
    std::vector<DiscreteDemand> demands(3, DiscreteDemand::point(0.5, 4));
    const auto policy = compute_policy(scheme, demands);
    CHECK(policy.virtual_reservations[0] == VirtualReservation::finite(4));
    CHECK(policy.virtual_reservations[1] == VirtualReservation::finite(0));
    CHECK(policy.virtual_reservations[2].is_unbounded());
  }
  SUBCASE("off-peak-rate period reserves up to the point of no further benefit") {
    const auto scheme = scheme_from_rates({500, 1000, 500});
    const auto demands = exp_demands(3);
    const auto policy = compute_policy(scheme, demands);
    const auto& m = policy.virtual_reservations[0];
    REQUIRE_FALSE(m.is_unbounded());
    const auto thresholds = thresholds_of(policy.virtual_reservations);
    CHECK(marginal_revenue(0, m.cells(), thresholds, demands, scheme) <= 5.0 + 1e-6);
    CHECK(marginal_revenue(0, m.cells() - 1, thresholds, demands, scheme) > 5.0 + 1e-6);
  }
  SUBCASE("last period index is rejected") {
    const auto scheme = scheme_from_rates({1000, 500});
    std::vector<VirtualReservation> r(2, VirtualReservation::unbounded());
    CHECK_THROWS_AS(solve_reservation(1, r, scheme, exp_demands(2)), Error);
  }
}

TEST_CASE("compute_policy structure") {
  const auto falling = compute_policy(scheme_from_rates({1000, 400}), exp_demands(2));
  CHECK(falling.virtual_reservations[0] == VirtualReservation::finite(0));
  CHECK(falling.virtual_reservations[1].is_unbounded());

  const auto single = compute_policy(scheme_from_rates({1000, 2000, 500}), exp_demands(3));
  CHECK(std::abs(single.virtual_reservations[0].cells() * kStep - std::log(3.0)) <= 2 * kStep);
  CHECK(single.virtual_reservations[1] == VirtualReservation::finite(0));
  CHECK(single.virtual_reservations[2].is_unbounded());

  const auto two_peak = compute_policy(tou::testing::two_peak_tariff(), exp_demands(5));
  const auto& v = two_peak.virtual_reservations;
  CHECK(v[0].cells() > 0);
  CHECK(v[1] == VirtualReservation::finite(0));
  CHECK(v[2].cells() > 0);
  CHECK(v[3] == VirtualReservation::finite(0));
  CHECK(v[4].is_unbounded());
  // Period 1 covers both peaks and waits out the shoulder, so it reserves more.
  CHECK(v[0].cells() > v[2].cells());
}

TEST_CASE("expected cost examples") {
  SUBCASE("no storage pays the spot rate for every unit") {
    const auto scheme = tou::testing::two_peak_tariff();
    const auto demands = exp_demands(5);
    const auto policy = compute_policy(scheme, demands);
    double bill = 0.0;
    for (std::size_t i = 0; i < 5; ++i) bill += scheme.rate(i).cents() * demands[i].mean();
    CHECK(expected_cost(policy, 0, scheme, demands).total == Approx(bill).epsilon(1e-12));
  }
  SUBCASE("hand trace: discharge 2 of 3 at the peak, refill overnight") {
    const auto scheme = scheme_from_rates({1000, 500});
    std::vector<DiscreteDemand> demands{DiscreteDemand::point(1.0, 3), DiscreteDemand::point(1.0, 1)};
    const auto policy = compute_policy(scheme, demands);
    const auto cost = expected_cost(policy, 2, scheme, demands);
    CHECK(cost.total == Approx(25.0));
    CHECK(cost.expected_purchase_kwh[0] == Approx(1.0));
    CHECK(cost.expected_purchase_kwh[1] == Approx(3.0));
  }
  SUBCASE("deterministic demand with ample capacity shifts everything off-peak") {
    const auto scheme = scheme_from_rates({800, 1200, 500});
    std::vector<DiscreteDemand> demands(3, DiscreteDemand::point(1.0, 2));
    const auto policy = compute_policy(scheme, demands);
    CHECK(expected_cost(policy, 4, scheme, demands).total == Approx(30.0));
    CHECK(expected_cost(policy, 6, scheme, demands).total == Approx(30.0));
    // C = 1: one unit bought at 5 serves the 12 cent period.
    CHECK(expected_cost(policy, 1, scheme, demands).total == Approx(16 + 12 + 5 * 3));
  }
  SUBCASE("policy from other inputs is rejected") {
    const auto scheme = scheme_from_rates({1000, 500});
    std::vector<DiscreteDemand> a{DiscreteDemand::point(1.0, 3), DiscreteDemand::point(1.0, 1)};
    std::vector<DiscreteDemand> b{DiscreteDemand::point(1.0, 2), DiscreteDemand::point(1.0, 1)};
    const auto policy = compute_policy(scheme, a);
    CHECK_THROWS_AS(expected_cost(policy, 2, scheme, b), Error);
  }
}

TEST_CASE("to_cells rejects off-grid energies") {
  CHECK(to_cells(1.25, 0.25) == 5);
  CHECK(to_cells(0.3, 0.1) == 3);
  try {
    to_cells(1.3, 0.25);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("property: normalization, monotone marginal revenue, exact finite differences") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = tou::testing::random_instance(gen, 5, 6, 0.5);
    const auto& scheme = inst.scheme;
    const auto& demands = inst.demands;
    const auto policy = compute_policy(scheme, demands);
    const auto thresholds = thresholds_of(policy.virtual_reservations);
    const std::size_t n = scheme.size();
    Cells horizon = 0;
    for (const auto& d : demands) horizon += d.max_cells();
    const Cells cap = horizon + 2;
    const auto proj = policy.projections(cap);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      double prev = std::numeric_limits<double>::infinity();
      for (Cells m = 0; m <= horizon + 1; ++m) {
        const auto t = charge_timing_probs(i, m, thresholds, demands);
        REQUIRE(std::abs(sum(t.probs) - 1.0) <= 1e-9);
        const double mr = marginal_revenue(i, m, thresholds, demands, scheme);
        CHECK(mr <= prev + 1e-12);
        prev = mr;
        // Net marginal cost of one more reserved cell, from the cost itself.
        if (m + 1 <= cap) {
          const double fd = (scheme.rate(i).cents() * 0.5 + cost_to_go(i, m + 1, proj, scheme, demands) -
                             cost_to_go(i, m, proj, scheme, demands)) /
                            0.5;
          CHECK(fd == Approx(scheme.rate(i).cents() - mr).epsilon(1e-9).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("property: downstream reservations at or above M_i* do not affect it") {
  std::mt19937_64 gen(99);
  int perturbed = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = tou::testing::random_instance(gen, 5, 6, 1.0);
    const auto policy = compute_policy(inst.scheme, inst.demands);
    const auto& v = policy.virtual_reservations;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (v[i].is_unbounded()) continue;
      for (std::size_t j = i + 1; j + 1 < n; ++j) {
        if (!v[j].is_unbounded() && v[j].cells() < v[i].cells()) continue;
        // A tie M_j* = M_i* only separates the two when the level can sit
        // exactly on the threshold, which takes an atom of zero demand.
        if (!v[j].is_unbounded() && v[j].cells() == v[i].cells()) {
          bool atom_at_zero = false;
          for (std::size_t t = i + 1; t <= j; ++t) atom_at_zero |= inst.demands[t].mass(0) > 0.0;
          if (atom_at_zero) continue;
        }
        for (auto replacement : {VirtualReservation::unbounded(),
                                 VirtualReservation::finite(v[i].cells() + 7)}) {
          auto changed = v;
          changed[j] = replacement;
          CHECK(solve_reservation(i, changed, inst.scheme, inst.demands) == v[i]);
          ++perturbed;
        }
      }
    }
  }
  CHECK(perturbed > 20);
}

TEST_CASE("property: expected cost is nonincreasing in capacity") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = tou::testing::random_instance(gen, 5, 6, 1.0);
    const auto policy = compute_policy(inst.scheme, inst.demands);
    double prev = std::numeric_limits<double>::infinity();
    for (Cells c = 0; c <= 25; ++c) {
      const double cost = expected_cost(policy, c, inst.scheme, inst.demands).total;
      CHECK(cost <= prev + 1e-9);
      prev = cost;
    }
  }
}
