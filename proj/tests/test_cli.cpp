#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tou/cli.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = TOU_TEST_DATA;

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = tou::cli::dispatch(args, out, err);
  return {status, out.str(), err.str()};
}

std::string data(const char* name) { return (kData / name).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("tou_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("tariff check") {
  const auto ok = run({"tariff", "check", data("two_peak.json")});
  CHECK(ok.status == tou::cli::kExitOk);
  CHECK(contains(ok.out, "pi_max 7.7000"));

  const auto gap = run({"tariff", "check", data("gap_tariff.json")});
  CHECK(gap.status == tou::cli::kExitValidation);
  CHECK(contains(gap.err, "GapOrOverlap"));

  const auto missing = run({"tariff", "check", data("missing.json")});
  CHECK(missing.status == tou::cli::kExitValidation);
  CHECK(contains(missing.err, "cannot open"));

  CHECK(run({"tariff", "check", data("broken.json")}).status == tou::cli::kExitValidation);
}

TEST_CASE("usage errors") {
  CHECK(run({}).status == tou::cli::kExitValidation);
  CHECK(run({"frobnicate"}).status == tou::cli::kExitValidation);
  const auto r = run({"size", "--tariff", data("two_peak.json"), "--demand", data("exp_demand.json")});
  CHECK(r.status == tou::cli::kExitValidation);
  CHECK(contains(r.err, "--amortized-cost"));
  CHECK(run({"--help"}).status == tou::cli::kExitOk);
}

TEST_CASE("demand inspect") {
  const auto r = run({"demand", "inspect", data("households.json")});
  CHECK(r.status == tou::cli::kExitOk);
  CHECK(contains(r.out, "user a"));
  CHECK(contains(r.out, "user b"));
}

TEST_CASE("size") {
  const auto infeasible = run({"size", "--tariff", data("two_peak.json"), "--demand",
                               data("exp_demand.json"), "--amortized-cost", "8"});
  CHECK(infeasible.status == tou::cli::kExitOk);
  CHECK(contains(infeasible.out, "infeasible: pi_s 8.0000 > pi_max 7.7000"));
  CHECK(contains(infeasible.out, "C* 0.0000 kWh"));

  const auto feasible = run({"size", "--tariff", data("two_peak.json"), "--demand",
                             data("exp_demand.json"), "--amortized-cost", "2"});
  CHECK(feasible.status == tou::cli::kExitOk);
  CHECK(contains(feasible.out, "feasible: pi_s 2.0000 <= pi_max 7.7000"));

  CHECK(run({"size", "--tariff", data("two_peak.json"), "--demand", data("exp_demand.json"),
             "--amortized-cost", "abc"})
            .status == tou::cli::kExitValidation);
}

TEST_CASE("solve csv") {
  const auto r = run({"solve", "--tariff", data("single_peak.json"), "--demand",
                      data("exp_demand3.json"), "--output", "csv"});
  REQUIRE(r.status == tou::cli::kExitOk);
  std::istringstream lines(r.out);
  std::string header, first, second, third;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  std::getline(lines, third);
  CHECK(header == "period,rate,M_star,N,expected_purchase,expected_cost");
  CHECK(first.rfind("1,10,1.1,", 0) == 0);
  CHECK(second.rfind("2,20,0,0,", 0) == 0);
  CHECK(third.rfind("3,5,inf,", 0) == 0);

  // Mismatched period counts are a validation error.
  CHECK(run({"solve", "--tariff", data("two_peak.json"), "--demand", data("exp_demand3.json")})
            .status == tou::cli::kExitValidation);
}

TEST_CASE("oracle compare") {
  const auto ok = run({"oracle", "compare", "--tariff", data("two_peak.json"), "--demand",
                       data("small_demand.json"), "--capacity", "2", "--grid-step", "0.05"});
  CHECK(ok.status == tou::cli::kExitOk);
  CHECK(contains(ok.out, "match"));

  const auto big = run({"oracle", "compare", "--tariff", data("two_peak.json"), "--demand",
                        data("exp_demand.json"), "--capacity", "20"});
  CHECK(big.status == tou::cli::kExitSolverDiagnostic);
  CHECK(contains(big.err, "StateSpaceTooLarge"));

  const auto off_grid = run({"oracle", "compare", "--tariff", data("two_peak.json"), "--demand",
                             data("small_demand.json"), "--capacity", "0.33", "--grid-step", "0.05"});
  CHECK(off_grid.status == tou::cli::kExitValidation);
}

TEST_CASE("byte-identical outputs across runs") {
  TempDir tmp;
  const auto a = tmp.path / "a";
  const auto b = tmp.path / "b";
  for (const auto& dir : {a, b}) {
    REQUIRE(run({"experiment", "cv-gap", "--config", data("experiment.json"), "--out",
                 (dir / "cv.csv").string(), "--plot", (dir / "cv.svg").string()})
                .status == 0);
    REQUIRE(run({"experiment", "aggregate", "--config", data("experiment.json"), "--out",
                 (dir / "agg.csv").string()})
                .status == 0);
    REQUIRE(run({"solve", "--tariff", data("two_peak.json"), "--demand", data("exp_demand.json"),
                 "--capacity", "2", "--out-dir", (dir / "solve").string()})
                .status == 0);
    REQUIRE(run({"size", "--tariff", data("two_peak.json"), "--demand", data("exp_demand.json"),
                 "--amortized-cost", "2", "--mr-curve", (dir / "mr.csv").string()})
                .status == 0);
  }
  for (const char* name : {"cv.csv", "cv.svg", "agg.csv", "solve/solve.csv", "mr.csv"}) {
    CAPTURE(name);
    const auto x = slurp(a / name);
    CHECK_FALSE(x.empty());
    CHECK(x == slurp(b / name));
  }
  CHECK(slurp(a / "cv.csv").rfind("cv,cost_gap\n", 0) == 0);
  CHECK(slurp(a / "agg.csv").rfind("group_size,per_user_cost\n", 0) == 0);
  CHECK(slurp(a / "mr.csv").rfind("capacity_kwh,total_marginal_revenue\n", 0) == 0);

  const auto manifest = nlohmann::json::parse(slurp(a / "run_manifest.json"));
  // The last run in the directory owns its manifest.
  CHECK(manifest.at("command") == "size");
  CHECK(manifest.at("input_digests").at(data("two_peak.json")).get<std::string>().size() == 64);
  CHECK(manifest.at("input_digests").contains(data("exp_demand.json")));
  CHECK(fs::exists(a / "solve" / "run_manifest.json"));
}
