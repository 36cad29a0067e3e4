#include "tou/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tou/config.hpp"
#include "tou/demand.hpp"
#include "tou/error.hpp"
#include "tou/experiments.hpp"
#include "tou/manifest.hpp"
#include "tou/oracle.hpp"
#include "tou/plot.hpp"
#include "tou/policy.hpp"
#include "tou/sizing.hpp"
#include "tou/tariff.hpp"

namespace tou::cli {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  double grid_step = 0.01;
  double tail_mass = 1e-6;
  double tol = kDefaultPriceTolerance;
  std::uint64_t seed = 1;
  std::string out_dir;
};

// Console numbers carry four decimals; CSV cells carry 12 significant digits.
std::string num(double v) { return fmt::format("{:.4f}", v); }
std::string csv(double v) { return fmt::format("{:.12g}", v); }
std::string price(Price p) { return num(p.cents()); }

class Run {
 public:
  Run(std::string command, std::span<const std::string> args, const GlobalOptions& g)
      : global_(g) {
    manifest_.command = std::move(command);
    manifest_.argv.assign(args.begin(), args.end());
    manifest_.grid_step = g.grid_step;
    manifest_.tail_mass = g.tail_mass;
    manifest_.tol = g.tol;
    manifest_.seed = g.seed;
    manifest_.tool_version = kVersion;
  }

  void input(const fs::path& path) { manifest_.input_digests[path.string()] = file_digest(path); }

  // Experiment configs carry their own grid and seed.
  void settings(double grid_step, double tail_mass, std::uint64_t seed) {
    manifest_.grid_step = grid_step;
    manifest_.tail_mass = tail_mass;
    manifest_.seed = seed;
  }

  fs::path output_path(const std::string& name) const {
    const fs::path p(name);
    if (global_.out_dir.empty() || p.is_absolute()) return p;
    return fs::path(global_.out_dir) / p;
  }

  void write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot write {}", path.string()));
    out << content;
    manifest_.outputs.push_back(path.string());
  }

  // The manifest goes to --out-dir, else next to the first output file.
  void finish() {
    fs::path dir;
    if (!global_.out_dir.empty()) {
      dir = global_.out_dir;
    } else if (!manifest_.outputs.empty()) {
      dir = fs::path(manifest_.outputs.front()).parent_path();
    } else {
      return;
    }
    manifest_.timestamp = utc_timestamp();
    if (!dir.empty()) fs::create_directories(dir);
    std::ofstream out(dir / "run_manifest.json", std::ios::binary);
    out << manifest_.to_json();
  }

 private:
  const GlobalOptions& global_;
  RunManifest manifest_;
};

std::vector<DiscreteDemand> load_discrete_demand(const fs::path& path, const GlobalOptions& g,
                                                 std::size_t periods) {
  const auto file = load_demand(path);
  for (std::size_t u = 0; u < file.specs.size(); ++u) {
    if (file.specs[u].size() != periods) {
      throw Error(ErrorCode::ConfigParseError,
                  fmt::format("{}: {} has {} demand records for {} tariff periods", path.string(),
                              file.users[u], file.specs[u].size(), periods));
    }
  }
  if (file.specs.size() == 1) return discretize(file.specs.front(), g.grid_step, g.tail_mass);
  return aggregate_users(file.specs, g.grid_step, g.tail_mass);
}

std::string reservation_text(const VirtualReservation& r, double step, bool for_csv) {
  if (r.is_unbounded()) return "inf";
  const double v = static_cast<double>(r.cells()) * step;
  return for_csv ? csv(v) : num(v);
}

int cmd_tariff_check(const std::string& file, std::ostream& out) {
  const auto scheme = load_tariff(file);
  const auto ext = local_extrema(scheme);
  fmt::print(out, "periods {}\n", scheme.size());
  fmt::print(out, "{:>6} {:>10} {:>10} {:>12}\n", "period", "start_h", "end_h", "rate");
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const auto& p = scheme.periods()[i];
    fmt::print(out, "{:>6} {:>10} {:>10} {:>12}\n", i + 1, num(p.start_hour), num(p.end_hour),
               price(p.rate));
  }
  fmt::print(out, "{:>6} {:>12} {:>12}\n", "pair", "local_max", "local_min");
  for (std::size_t k = 0; k < ext.maxima.size(); ++k) {
    fmt::print(out, "{:>6} {:>12} {:>12}\n", k + 1, price(ext.maxima[k]), price(ext.minima[k]));
  }
  fmt::print(out, "pi_max {}\n", price(pi_max(scheme)));
  return kExitOk;
}

int cmd_demand_inspect(const std::string& file, const GlobalOptions& g, std::ostream& out) {
  const auto demand = load_demand(file);
  for (std::size_t u = 0; u < demand.specs.size(); ++u) {
    if (demand.specs.size() > 1) fmt::print(out, "user {}\n", demand.users[u]);
    fmt::print(out, "{:>6} {:>12} {:>12} {:>12}\n", "period", "mean_kwh", "sd_kwh", "cv");
    const auto discrete = discretize(demand.specs[u], g.grid_step, g.tail_mass);
    for (std::size_t p = 0; p < discrete.size(); ++p) {
      const auto& d = discrete[p];
      const std::string cv_text = d.mean() > 0.0 ? num(cv(d)) : "n/a";
      fmt::print(out, "{:>6} {:>12} {:>12} {:>12}\n", p + 1, num(d.mean()), num(d.sd()), cv_text);
    }
  }
  return kExitOk;
}

struct SolveArgs {
  std::string tariff, demand, output = "table";
  std::optional<double> capacity;
};

int cmd_solve(const SolveArgs& a, Run& run, const GlobalOptions& g, std::ostream& out) {
  const auto scheme = load_tariff(a.tariff);
  const auto demands = load_discrete_demand(a.demand, g, scheme.size());
  run.input(a.tariff);
  run.input(a.demand);
  const auto policy = compute_policy(scheme, demands, g.tol);
  const double step = policy.grid_step;

  Cells capacity = 0;
  if (a.capacity) {
    capacity = to_cells(*a.capacity, step);
  } else {
    for (const auto& r : policy.virtual_reservations) {
      if (!r.is_unbounded()) capacity = std::max(capacity, r.cells());
    }
  }
  const auto projections = policy.projections(capacity);
  const auto cost = expected_cost(policy, capacity, scheme, demands);
  const std::size_t n = scheme.size();

  std::string table = "period,rate,M_star,N,expected_purchase,expected_cost\n";
  for (std::size_t i = 0; i < n; ++i) {
    table += fmt::format("{},{},{},{},{},{}\n", i + 1, csv(scheme.rate(i).cents()),
                         reservation_text(policy.virtual_reservations[i], step, true),
                         csv(static_cast<double>(projections[i]) * step),
                         csv(cost.expected_purchase_kwh[i]), csv(cost.period_cost[i]));
  }
  if (!g.out_dir.empty()) run.write(run.output_path("solve.csv"), table);

  if (a.output == "csv") {
    out << table;
    return kExitOk;
  }
  fmt::print(out, "capacity {} kWh\n", num(static_cast<double>(capacity) * step));
  fmt::print(out, "{:>6} {:>10} {:>12} {:>12} {:>18} {:>14}\n", "period", "rate", "M_star", "N",
             "expected_purchase", "expected_cost");
  for (std::size_t i = 0; i < n; ++i) {
    fmt::print(out, "{:>6} {:>10} {:>12} {:>12} {:>18} {:>14}\n", i + 1, price(scheme.rate(i)),
               reservation_text(policy.virtual_reservations[i], step, false),
               num(static_cast<double>(projections[i]) * step), num(cost.expected_purchase_kwh[i]),
               num(cost.period_cost[i]));
  }
  fmt::print(out, "expected daily cost {}\n", num(cost.total));
  fmt::print(out, "charge timing (probability that period j is the first to buy after reserving N_i)\n");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto timing = charge_timing_probs(i, projections[i], projections, demands);
    std::string line = fmt::format("  after period {}:", i + 1);
    for (std::size_t k = 0; k < timing.probs.size(); ++k) {
      line += fmt::format(" P{}={}", timing.first_period + k + 1, num(timing.probs[k]));
    }
    fmt::print(out, "{}\n", line);
  }
  return kExitOk;
}

struct SizeArgs {
  std::string tariff, demand, amortized_cost, mr_curve;
  std::size_t curve_points = 51;
};

int cmd_size(const SizeArgs& a, Run& run, const GlobalOptions& g, std::ostream& out) {
  const auto scheme = load_tariff(a.tariff);
  const auto demands = load_discrete_demand(a.demand, g, scheme.size());
  run.input(a.tariff);
  run.input(a.demand);
  Price pi_s;
  try {
    pi_s = Price::parse(a.amortized_cost);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigParseError, fmt::format("--amortized-cost: {}", e.detail()));
  }
  SizingOptions options;
  options.tol = g.tol;
  options.curve_points = a.mr_curve.empty() ? 0 : a.curve_points;
  const auto result = optimal_capacity(scheme, demands, pi_s, options);

  fmt::print(out, "pi_max {}\n", price(result.pi_max));
  fmt::print(out, "pi_s {}\n", price(result.pi_s));
  if (!result.feasible) {
    fmt::print(out, "infeasible: pi_s {} > pi_max {}\n", price(result.pi_s), price(result.pi_max));
  } else {
    fmt::print(out, "feasible: pi_s {} <= pi_max {}\n", price(result.pi_s), price(result.pi_max));
  }
  fmt::print(out, "C* {} kWh\n", num(result.c_star));
  fmt::print(out, "expected daily cost at C* {}\n", num(result.expected_daily_cost_at_c_star));
  fmt::print(out, "expected daily cost at C=0 {}\n", num(result.expected_daily_cost_without_storage));
  const double savings = result.expected_daily_cost_without_storage -
                         result.expected_daily_cost_at_c_star - result.pi_s.cents() * result.c_star;
  fmt::print(out, "net daily savings vs C=0 {}\n", num(savings));
  for (const auto& w : result.warnings) fmt::print(out, "warning: {}\n", w);

  if (!a.mr_curve.empty()) {
    std::string body = "capacity_kwh,total_marginal_revenue\n";
    for (const auto& p : result.mr_curve) {
      body += fmt::format("{},{}\n", csv(p.capacity_kwh), csv(p.total_marginal_revenue));
    }
    run.write(run.output_path(a.mr_curve), body);
  }
  return kExitOk;
}

struct OracleArgs {
  std::string tariff, demand;
  double capacity = 0.0;
  double max_diff = 1e-9;
  std::int64_t days = 100000;
};

int cmd_oracle_compare(const OracleArgs& a, Run& run, const GlobalOptions& g, std::ostream& out) {
  const auto scheme = load_tariff(a.tariff);
  const auto demands = load_discrete_demand(a.demand, g, scheme.size());
  run.input(a.tariff);
  run.input(a.demand);
  const Cells capacity = to_cells(a.capacity, demands.front().step());
  const auto dp = brute_force_dp(scheme, demands, capacity);
  const auto policy = compute_policy(scheme, demands, g.tol);
  const double policy_cost = expected_cost(policy, capacity, scheme, demands).total;
  const double diff = std::abs(dp.optimal_cost - policy_cost);
  const double allowed = a.max_diff * std::max(1.0, std::abs(dp.optimal_cost));
  fmt::print(out, "dp_cost {}\npolicy_cost {}\ndifference {:.3e}\n", num(dp.optimal_cost),
             num(policy_cost), diff);
  if (diff > allowed) {
    fmt::print(out, "mismatch: difference exceeds {:.3e}\n", allowed);
    return kExitCheckFailed;
  }
  fmt::print(out, "match\n");
  return kExitOk;
}

int cmd_oracle_simulate(const OracleArgs& a, Run& run, const GlobalOptions& g, std::ostream& out) {
  const auto scheme = load_tariff(a.tariff);
  const auto demands = load_discrete_demand(a.demand, g, scheme.size());
  run.input(a.tariff);
  run.input(a.demand);
  const Cells capacity = to_cells(a.capacity, demands.front().step());
  const auto policy = compute_policy(scheme, demands, g.tol);
  const double exact = expected_cost(policy, capacity, scheme, demands).total;
  const auto report = simulate_policy(policy, capacity, scheme, demands, a.days, g.seed);
  fmt::print(out, "days {}\nmean_cost {}\nsd_cost {}\ncv_cost {}\nci95_halfwidth {}\n", report.days,
             num(report.mean_cost), num(report.sd_cost), num(report.cv_cost),
             num(report.ci_halfwidth));
  fmt::print(out, "cost_gap_vs_mean_demand {}\nexact_expected_cost {}\n", num(report.cost_gap),
             num(exact));
  return kExitOk;
}

struct ExperimentArgs {
  std::string config, out_csv, plot;
};

int cmd_experiment(bool cv_gap, const ExperimentArgs& a, Run& run, std::ostream& out) {
  const auto config = load_experiment(a.config);
  run.input(a.config);
  run.settings(config.grid_step, config.tail_mass, config.seed);
  std::string body;
  std::vector<std::pair<double, double>> points;
  if (cv_gap) {
    body = "cv,cost_gap\n";
    fmt::print(out, "{:>8} {:>12} {:>12} {:>12} {:>10}\n", "cv", "cost_gap", "total_cost",
               "baseline", "C*_kwh");
    for (const auto& row : cv_cost_gap_experiment(config)) {
      body += fmt::format("{},{}\n", csv(row.cv), csv(row.cost_gap));
      points.emplace_back(row.cv, row.cost_gap);
      fmt::print(out, "{:>8} {:>12} {:>12} {:>12} {:>10}\n", num(row.cv), num(row.cost_gap),
                 num(row.total_cost), num(row.baseline_cost), num(row.c_star));
    }
  } else {
    body = "group_size,per_user_cost\n";
    fmt::print(out, "{:>10} {:>14} {:>10} {:>12}\n", "group_size", "per_user_cost", "C*_kwh",
               "daily_cv");
    for (const auto& row : aggregation_experiment(config)) {
      body += fmt::format("{},{}\n", row.group_size, csv(row.per_user_cost));
      points.emplace_back(row.group_size, row.per_user_cost);
      fmt::print(out, "{:>10} {:>14} {:>10} {:>12}\n", row.group_size, num(row.per_user_cost),
                 num(row.c_star), num(row.aggregate_cv));
    }
  }
  run.write(run.output_path(a.out_csv), body);
  if (!a.plot.empty()) {
    const auto svg = cv_gap ? line_chart_svg("CV vs normalized cost gap", "demand CV", "cost gap", points)
                            : line_chart_svg("Per-user cost vs group size", "users",
                                             "cost per user (cents/day)", points);
    run.write(run.output_path(a.plot), svg);
  }
  return kExitOk;
}

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  GlobalOptions g;
  CLI::App app{"Storage control and sizing under Time-of-Use tariffs", "tou"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.add_option("--grid-step", g.grid_step, "Energy grid step in kWh")->check(CLI::PositiveNumber);
  app.add_option("--tail-mass", g.tail_mass, "Tail probability folded into the last demand cell");
  app.add_option("--tol", g.tol, "Price tolerance in cents/kWh")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out-dir", g.out_dir, "Directory for outputs and the run manifest");

  auto* tariff = app.add_subcommand("tariff", "Tariff tools")->require_subcommand(1);
  std::string tariff_file;
  auto* tariff_check = tariff->add_subcommand("check", "Validate a tariff and show its price extrema");
  tariff_check->add_option("file", tariff_file)->required();

  auto* demand = app.add_subcommand("demand", "Demand tools")->require_subcommand(1);
  std::string demand_file;
  auto* demand_inspect = demand->add_subcommand("inspect", "Per-period mean, sd and CV");
  demand_inspect->add_option("file", demand_file)->required();

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Optimal virtual reservations and expected cost");
  solve->add_option("--tariff", solve_args.tariff)->required();
  solve->add_option("--demand", solve_args.demand)->required();
  solve->add_option("--capacity", solve_args.capacity, "Storage capacity in kWh");
  solve->add_option("--output", solve_args.output)->check(CLI::IsMember({"table", "csv"}));

  SizeArgs size_args;
  auto* size = app.add_subcommand("size", "Optimal storage capacity");
  size->add_option("--tariff", size_args.tariff)->required();
  size->add_option("--demand", size_args.demand)->required();
  size->add_option("--amortized-cost", size_args.amortized_cost, "cents per kWh of capacity per day")
      ->required();
  size->add_option("--mr-curve", size_args.mr_curve, "CSV file for the marginal revenue curve");
  size->add_option("--curve-points", size_args.curve_points)->check(CLI::PositiveNumber);

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Independent checks")->require_subcommand(1);
  auto* compare = oracle->add_subcommand("compare", "Brute-force DP versus the reservation policy");
  compare->add_option("--tariff", oracle_args.tariff)->required();
  compare->add_option("--demand", oracle_args.demand)->required();
  compare->add_option("--capacity", oracle_args.capacity)->required();
  compare->add_option("--max-diff", oracle_args.max_diff, "Allowed difference relative to max(1, cost)");
  auto* simulate = oracle->add_subcommand("simulate", "Monte Carlo evaluation of the policy");
  simulate->add_option("--tariff", oracle_args.tariff)->required();
  simulate->add_option("--demand", oracle_args.demand)->required();
  simulate->add_option("--capacity", oracle_args.capacity)->required();
  simulate->add_option("--days", oracle_args.days)->check(CLI::PositiveNumber);

  ExperimentArgs exp_args;
  auto* experiment = app.add_subcommand("experiment", "Desk-scale studies")->require_subcommand(1);
  auto* cv_gap = experiment->add_subcommand("cv-gap", "Demand CV versus normalized cost gap");
  auto* aggregate = experiment->add_subcommand("aggregate", "Per-user cost versus group size");
  for (auto* sub : {cv_gap, aggregate}) {
    sub->add_option("--config", exp_args.config)->required();
    sub->add_option("--out", exp_args.out_csv)->required();
    sub->add_option("--plot", exp_args.plot, "SVG chart output");
  }
  for (auto* sub : {tariff, demand, solve, size, oracle, experiment, tariff_check, demand_inspect,
                    compare, simulate, cv_gap, aggregate}) {
    sub->fallthrough();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "usage error: {}\nrun 'tou --help' for usage\n", e.what());
    return kExitValidation;
  }

  try {
    std::string command;
    for (auto* sub = app.get_subcommands().front(); sub != nullptr;) {
      command += (command.empty() ? "" : " ") + sub->get_name();
      const auto subs = sub->get_subcommands();
      sub = subs.empty() ? nullptr : subs.front();
    }
    Run run(command, args, g);
    int status = kExitOk;
    if (tariff_check->parsed()) {
      status = cmd_tariff_check(tariff_file, out);
    } else if (demand_inspect->parsed()) {
      status = cmd_demand_inspect(demand_file, g, out);
    } else if (solve->parsed()) {
      status = cmd_solve(solve_args, run, g, out);
    } else if (size->parsed()) {
      status = cmd_size(size_args, run, g, out);
    } else if (compare->parsed()) {
      status = cmd_oracle_compare(oracle_args, run, g, out);
    } else if (simulate->parsed()) {
      status = cmd_oracle_simulate(oracle_args, run, g, out);
    } else if (cv_gap->parsed() || aggregate->parsed()) {
      status = cmd_experiment(cv_gap->parsed(), exp_args, run, out);
    } else {
      throw Error(ErrorCode::UnknownCommand, "no command given");
    }
    run.finish();
    return status;
  } catch (const Error& e) {
    fmt::print(err, "{}\n", e.what());
    return is_solver_diagnostic(e.code()) ? kExitSolverDiagnostic : kExitValidation;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  }
}

}  // namespace tou::cli
