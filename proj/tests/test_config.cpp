#include <doctest.h>

#include <filesystem>
#include <string>

#include "tou/config.hpp"
#include "tou/error.hpp"

using namespace tou;

namespace {

const std::filesystem::path kData = TOU_TEST_DATA;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("tariff files") {
  const auto scheme = load_tariff(kData / "two_peak.json");
  CHECK(scheme.size() == 5);
  CHECK(scheme.rate(1) == Price::parse("12.4"));
  CHECK(pi_max(scheme) == Price::parse("7.7"));

  const auto list = load_tariff(kData / "single_peak.json");
  CHECK(list.size() == 3);
  CHECK(list.rate(2) == Price::parse("5"));

  CHECK(code_of([] { load_tariff(kData / "gap_tariff.json"); }) == ErrorCode::GapOrOverlap);
  CHECK(code_of([] { load_tariff(kData / "broken.json"); }) == ErrorCode::ConfigParseError);
  CHECK(code_of([] { load_tariff(kData / "missing.json"); }) == ErrorCode::ConfigParseError);
}

TEST_CASE("parse errors name the line or field") {
  try {
    parse_tariff_periods("[\n{\"start_hour\": 0,\n\"end_hour\": 24,,}\n]", "t.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    parse_tariff_periods(R"([{"start_hour": 0, "end_hour": 24}])", "t.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("periods[0]") != std::string::npos);
    CHECK(std::string(e.what()).find("rate_cents_per_kwh") != std::string::npos);
  }
  CHECK(code_of([] {
          parse_tariff_periods(R"([{"start_hour": 0, "end_hour": 24, "rate_cents_per_kwh": "1.234"}])",
                               "t.json");
        }) == ErrorCode::ConfigParseError);
  CHECK(code_of([] { parse_demand(R"([{"kind": "gamma", "mean": 1}])", "d.json"); }) ==
        ErrorCode::ConfigParseError);
  CHECK(code_of([] {
          parse_demand(R"([{"user": "a", "kind": "point_mass", "value": 1},
                           {"kind": "point_mass", "value": 1}])",
                       "d.json");
        }) == ErrorCode::ConfigParseError);
}

TEST_CASE("demand files") {
  const auto single = load_demand(kData / "small_demand.json");
  REQUIRE(single.specs.size() == 1);
  CHECK(single.specs[0].size() == 5);
  CHECK(std::holds_alternative<EmpiricalHistogram>(single.specs[0][0]));
  CHECK(std::holds_alternative<TruncatedNormal>(single.specs[0][2]));

  const auto multi = load_demand(kData / "households.json");
  REQUIRE(multi.users == std::vector<std::string>{"a", "b"});
  CHECK(multi.specs[0].size() == 5);
  CHECK(multi.specs[1].size() == 5);
  CHECK(descriptor_mean(multi.specs[1][3]) == doctest::Approx(1.5));
}

TEST_CASE("experiment config") {
  const auto cfg = load_experiment(kData / "experiment.json");
  CHECK(cfg.scheme.size() == 5);
  CHECK(cfg.user.size() == 5);
  CHECK(cfg.cv_grid == std::vector<double>{0.2, 0.5, 1.0});
  CHECK(cfg.group_sizes == std::vector<int>{1, 5, 10, 20, 40});
  CHECK(cfg.days == 20000);
  CHECK(cfg.seed == 2024);
  CHECK(cfg.pi_s == Price::parse("2"));

  const auto inline_cfg = parse_experiment(R"({
    "tariff": [{"start_hour": 0, "end_hour": 12, "rate_cents_per_kwh": 9},
               {"start_hour": 12, "end_hour": 24, "rate_cents_per_kwh": 4}],
    "user": [{"kind": "point_mass", "value": 1}, {"kind": "exponential", "mean": 2}],
    "group_sizes": [1, 2]
  })",
                                           "inline", ".");
  CHECK(inline_cfg.scheme.size() == 2);
  CHECK(inline_cfg.cv_grid.empty());
  CHECK(inline_cfg.reoptimize_baseline);

  CHECK(code_of([] {
          parse_experiment(R"({"tariff": "two_peak.json", "user": "user.json", "cv_grid": [1, 0.5]})",
                           "cfg", kData);
        }) == ErrorCode::ConfigParseError);
  CHECK(code_of([] {
          parse_experiment(R"({"tariff": "two_peak.json", "user": "user.json", "group_sizes": [1.5]})",
                           "cfg", kData);
        }) == ErrorCode::ConfigParseError);
}
