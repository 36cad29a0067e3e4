#include "tou/manifest.hpp"

#include <chrono>
#include <ctime>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "tou/config.hpp"
#include "tou/error.hpp"

namespace tou {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidArgument, "sha256 failed");
  }
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string file_digest(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["argv"] = argv;
  j["input_digests"] = input_digests;
  j["grid_step"] = grid_step;
  j["tail_mass"] = tail_mass;
  j["tol"] = tol;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

}  // namespace tou
