#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tou {

std::string sha256_hex(std::string_view data);
std::string file_digest(const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> input_digests;  // path -> sha256
  double grid_step = 0.0;
  double tail_mass = 0.0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601
  std::vector<std::string> outputs;

  std::string to_json() const;
};

std::string utc_timestamp();

}  // namespace tou
