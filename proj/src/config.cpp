#include "tou/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "tou/error.hpp"

namespace tou {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string_view source, const std::string& what) {
  throw Error(ErrorCode::ConfigParseError, fmt::format("{}: {}", source, what));
}

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    fail(source, fmt::format("line {}: malformed JSON ({})", line, e.what()));
  }
}

const json& field(const json& record, const char* key, std::string_view where,
                  std::string_view source) {
  if (!record.is_object() || !record.contains(key)) {
    fail(source, fmt::format("{}: missing field '{}'", where, key));
  }
  return record.at(key);
}

double number(const json& record, const char* key, std::string_view where, std::string_view source) {
  const auto& v = field(record, key, where, source);
  if (!v.is_number()) fail(source, fmt::format("{}.{}: expected a number", where, key));
  return v.get<double>();
}

std::vector<double> numbers(const json& record, const char* key, std::string_view where,
                            std::string_view source) {
  const auto& v = field(record, key, where, source);
  if (!v.is_array()) fail(source, fmt::format("{}.{}: expected a list of numbers", where, key));
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(source, fmt::format("{}.{}: expected a list of numbers", where, key));
    out.push_back(e.get<double>());
  }
  return out;
}

Price price(const json& record, const char* key, std::string_view where, std::string_view source) {
  const auto& v = field(record, key, where, source);
  try {
    if (v.is_string()) return Price::parse(v.get<std::string>());
    if (v.is_number()) return Price::from_cents(v.get<double>());
  } catch (const Error& e) {
    fail(source, fmt::format("{}.{}: {}", where, key, e.detail()));
  }
  fail(source, fmt::format("{}.{}: expected a decimal number", where, key));
}

const json& records_of(const json& doc, std::string_view source) {
  if (doc.is_array()) return doc;
  if (doc.is_object() && doc.contains("periods") && doc.at("periods").is_array()) {
    return doc.at("periods");
  }
  fail(source, "expected a list of period records or an object with a 'periods' list");
}

std::vector<Period> periods_from(const json& doc, std::string_view source) {
  std::vector<Period> out;
  const auto& records = records_of(doc, source);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto where = fmt::format("periods[{}]", i);
    Period p;
    p.start_hour = number(records[i], "start_hour", where, source);
    p.end_hour = number(records[i], "end_hour", where, source);
    p.rate = price(records[i], "rate_cents_per_kwh", where, source);
    if (p.start_hour < 0.0 || p.start_hour >= 24.0) {
      fail(source, fmt::format("{}.start_hour: {} outside [0, 24)", where, p.start_hour));
    }
    out.push_back(p);
  }
  return out;
}

TouScheme scheme_from(const json& doc, std::string_view source) {
  auto raw = periods_from(doc, source);
  try {
    return TouScheme::validate(std::move(raw));
  } catch (const Error& e) {
    // Model violations keep their own code; the source is added for context.
    throw Error(e.code(), fmt::format("{}: {}", source, e.detail()));
  }
}

DemandDescriptor descriptor_from(const json& r, std::string_view where, std::string_view source) {
  const auto& kind_field = field(r, "kind", where, source);
  if (!kind_field.is_string()) fail(source, fmt::format("{}.kind: expected a string", where));
  const auto kind = kind_field.get<std::string>();
  if (kind == "exponential") return Exponential{number(r, "mean", where, source)};
  if (kind == "lognormal") {
    return LogNormal{number(r, "mean", where, source), number(r, "cv", where, source)};
  }
  if (kind == "truncated_normal") {
    return TruncatedNormal{number(r, "mean", where, source), number(r, "sd", where, source)};
  }
  if (kind == "point_mass") return PointMass{number(r, "value", where, source)};
  if (kind == "histogram") {
    return EmpiricalHistogram{numbers(r, "bin_edges", where, source),
                              numbers(r, "masses", where, source)};
  }
  fail(source, fmt::format("{}.kind: unknown demand kind '{}'", where, kind));
}

DemandFile demand_from(const json& doc, std::string_view source) {
  const auto& records = records_of(doc, source);
  DemandFile out;
  bool any_user = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto where = fmt::format("periods[{}]", i);
    const bool has_user = records[i].is_object() && records[i].contains("user");
    if (i == 0) any_user = has_user;
    if (has_user != any_user) {
      fail(source, fmt::format("{}: 'user' must be given on every record or on none", where));
    }
    std::string user = "user";
    if (has_user) {
      const auto& u = records[i].at("user");
      user = u.is_string() ? u.get<std::string>() : u.dump();
    }
    auto it = std::find(out.users.begin(), out.users.end(), user);
    if (it == out.users.end()) {
      out.users.push_back(user);
      out.specs.emplace_back();
      it = out.users.end() - 1;
    }
    out.specs[static_cast<std::size_t>(it - out.users.begin())].push_back(
        descriptor_from(records[i], where, source));
  }
  if (out.specs.empty()) fail(source, "no demand records");
  return out;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Period> parse_tariff_periods(std::string_view text, std::string_view source) {
  return periods_from(parse_json(text, source), source);
}

TouScheme load_tariff(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  return scheme_from(parse_json(text, path.string()), path.string());
}

DemandFile parse_demand(std::string_view text, std::string_view source) {
  return demand_from(parse_json(text, source), source);
}

DemandFile load_demand(const std::filesystem::path& path) {
  return parse_demand(read_text_file(path), path.string());
}

ExperimentConfig parse_experiment(std::string_view text, std::string_view source,
                                  const std::filesystem::path& base_dir) {
  const auto doc = parse_json(text, source);
  if (!doc.is_object()) fail(source, "expected an object");

  const auto& tariff = field(doc, "tariff", "config", source);
  TouScheme scheme = [&] {
    if (tariff.is_string()) return load_tariff(base_dir / tariff.get<std::string>());
    return scheme_from(tariff, fmt::format("{}:tariff", source));
  }();
  ExperimentConfig cfg{.scheme = std::move(scheme)};

  const auto& user = field(doc, "user", "config", source);
  if (user.is_string()) {
    cfg.user = load_demand(base_dir / user.get<std::string>()).specs.front();
  } else {
    cfg.user = demand_from(user, fmt::format("{}:user", source)).specs.front();
  }
  if (doc.contains("cv_grid")) cfg.cv_grid = numbers(doc, "cv_grid", "config", source);
  if (doc.contains("group_sizes")) {
    for (double g : numbers(doc, "group_sizes", "config", source)) {
      if (g != static_cast<int>(g)) fail(source, "config.group_sizes: expected integers");
      cfg.group_sizes.push_back(static_cast<int>(g));
    }
  }
  if (doc.contains("days")) cfg.days = static_cast<std::int64_t>(number(doc, "days", "config", source));
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned()) fail(source, "config.seed: expected a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("amortized_cost_cents_per_kwh")) {
    cfg.pi_s = price(doc, "amortized_cost_cents_per_kwh", "config", source);
  }
  if (doc.contains("grid_step")) cfg.grid_step = number(doc, "grid_step", "config", source);
  if (doc.contains("tail_mass")) cfg.tail_mass = number(doc, "tail_mass", "config", source);
  if (doc.contains("reoptimize_baseline")) {
    const auto& b = doc.at("reoptimize_baseline");
    if (!b.is_boolean()) fail(source, "config.reoptimize_baseline: expected true or false");
    cfg.reoptimize_baseline = b.get<bool>();
  }
  try {
    validate(cfg);
  } catch (const Error& e) {
    fail(source, e.detail());
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return parse_experiment(read_text_file(path), path.string(), path.parent_path());
}

}  // namespace tou
