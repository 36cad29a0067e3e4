#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tou/demand.hpp"
#include "tou/experiments.hpp"
#include "tou/tariff.hpp"

namespace tou {

// Configuration files are JSON. Errors are reported as ConfigParseError
// naming the source, and the line or the offending field.

/// Raw periods from a tariff document: either a list of records or an
/// object with a "periods" list. Keys: start_hour, end_hour,
/// rate_cents_per_kwh.
std::vector<Period> parse_tariff_periods(std::string_view text, std::string_view source);

TouScheme load_tariff(const std::filesystem::path& path);

struct DemandFile {
  std::vector<std::string> users;  // in order of first appearance
  std::vector<DemandSpec> specs;   // parallel to users
};

/// Records {"kind": ..., params...}, one per period in order; records with a
/// "user" key are grouped per user.
DemandFile parse_demand(std::string_view text, std::string_view source);
DemandFile load_demand(const std::filesystem::path& path);


ExperimentConfig parse_experiment(std::string_view text, std::string_view source,
                                  const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Whole-file read; throws ConfigParseError when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tou
