#include "bench_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "ffbt/errors.hpp"

namespace ffbench {

using nlohmann::json;
using ffbt::ConfigError;

namespace {

const std::set<std::string> kKnownFields = {
    "variant", "workload", "n",      "capacity",  "seed",      "direction", "theta",     "key_space",
    "trap_height", "metrics", "bins", "topk",     "check_invariants", "actors", "read_lat", "write_lat",
    "window",  "out",      "replay", "emit_keys", "key_format"};

// A scalar is accepted wherever a list is expected.
template <typename T, typename Parse>
std::vector<T> list_of(const json& j, const char* field, Parse parse) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const json& e : j) out.push_back(parse(e));
  } else {
    out.push_back(parse(j));
  }
  if (out.empty()) throw ConfigError(std::string("'") + field + "' must not be empty");
  return out;
}

std::string as_string(const json& j, const char* field) {
  if (!j.is_string()) throw ConfigError(std::string("'") + field + "' must be a string");
  return j.get<std::string>();
}

std::uint64_t as_count(const json& j, const char* field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError(std::string("'") + field + "' must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

double as_number(const json& j, const char* field) {
  if (!j.is_number()) throw ConfigError(std::string("'") + field + "' must be a number");
  return j.get<double>();
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["variant"] = json::array();
  for (const auto v : c.variant) j["variant"].push_back(std::string(ffbt::to_string(v)));
  j["workload"] = json::array();
  for (const auto w : c.workload) j["workload"].push_back(std::string(ffbt::workloads::to_string(w)));
  j["n"] = c.n;
  j["capacity"] = c.capacity;
  j["seed"] = c.seed;
  j["direction"] = std::string(ffbt::workloads::to_string(c.direction));
  j["theta"] = c.theta;
  j["key_space"] = c.key_space;
  j["trap_height"] = c.trap_height;
  j["metrics"] = c.metrics;
  j["bins"] = c.bins;
  j["topk"] = c.topk;
  j["check_invariants"] = c.check_invariants;
  j["actors"] = c.actors;
  j["read_lat"] = c.read_lat;
  j["write_lat"] = c.write_lat;
  j["window"] = c.window;
  j["out"] = c.out.string();
  j["replay"] = c.replay ? json(c.replay->string()) : json(nullptr);
  j["emit_keys"] = c.emit_keys ? json(c.emit_keys->string()) : json(nullptr);
  j["key_format"] = std::string(ffbt::workloads::to_string(c.key_format));
  return j;
}

ExperimentConfig from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKnownFields.count(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  auto has = [&](const char* k) { return j.contains(k); };

  if (has("variant")) {
    c.variant = list_of<ffbt::Variant>(j["variant"], "variant",
                                       [](const json& e) { return ffbt::parse_variant(as_string(e, "variant")); });
  }
  if (has("workload")) {
    c.workload = list_of<ffbt::workloads::Family>(j["workload"], "workload", [](const json& e) {
      return ffbt::workloads::parse_family(as_string(e, "workload"));
    });
  }
  if (has("n")) c.n = list_of<std::uint64_t>(j["n"], "n", [](const json& e) { return as_count(e, "n"); });
  if (has("capacity")) c.capacity = as_count(j["capacity"], "capacity");
  if (has("seed")) c.seed = as_count(j["seed"], "seed");
  if (has("direction")) c.direction = ffbt::workloads::parse_direction(as_string(j["direction"], "direction"));
  if (has("theta")) c.theta = as_number(j["theta"], "theta");
  if (has("key_space")) c.key_space = as_count(j["key_space"], "key_space");
  if (has("trap_height")) c.trap_height = static_cast<std::uint32_t>(as_count(j["trap_height"], "trap_height"));
  if (has("metrics")) {
    c.metrics = list_of<std::string>(j["metrics"], "metrics", [](const json& e) { return as_string(e, "metrics"); });
  }
  if (has("bins")) c.bins = as_count(j["bins"], "bins");
  if (has("topk")) c.topk = as_count(j["topk"], "topk");
  if (has("check_invariants")) {
    const json& v = j["check_invariants"];
    if (v.is_boolean()) {
      c.check_invariants = v.get<bool>() ? 1000 : 0;
    } else {
      c.check_invariants = as_count(v, "check_invariants");
    }
  }
  if (has("actors")) {
    const json& v = j["actors"];
    c.actors.clear();
    if (!(v.is_array() && v.empty())) {
      c.actors = list_of<std::size_t>(v, "actors", [](const json& e) { return as_count(e, "actors"); });
    }
  }
  if (has("read_lat")) c.read_lat = as_number(j["read_lat"], "read_lat");
  if (has("write_lat")) c.write_lat = as_number(j["write_lat"], "write_lat");
  if (has("window")) c.window = as_count(j["window"], "window");
  if (has("out")) c.out = as_string(j["out"], "out");
  if (has("replay")) {
    c.replay = j["replay"].is_null() ? std::nullopt
                                     : std::optional<std::filesystem::path>(as_string(j["replay"], "replay"));
  }
  if (has("emit_keys")) {
    c.emit_keys = j["emit_keys"].is_null()
                      ? std::nullopt
                      : std::optional<std::filesystem::path>(as_string(j["emit_keys"], "emit_keys"));
  }
  if (has("key_format")) c.key_format = ffbt::workloads::parse_key_format(as_string(j["key_format"], "key_format"));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void validate(const ExperimentConfig& c) {
  if (c.capacity < 3) throw ConfigError("capacity must be at least 3");
  if (c.bins == 0) throw ConfigError("bins must be positive");
  if (c.window == 0) throw ConfigError("window must be positive");
  if (c.read_lat < 0 || c.write_lat < 0) throw ConfigError("latencies must be non-negative");
  if (!(c.theta > 0.0 && c.theta < 2.0)) throw ConfigError("theta must lie in (0, 2)");
  for (const std::size_t a : c.actors) {
    if (a == 0) throw ConfigError("actor counts must be positive");
  }
  for (const std::string& m : c.metrics) {
    if (std::find(kAllMetrics.begin(), kAllMetrics.end(), m) == kAllMetrics.end()) {
      throw ConfigError("unknown metric '" + m + "' (expected per_height, ccdf, topk, binned_max or utilization)");
    }
  }
  if (c.replay && c.emit_keys) throw ConfigError("--replay and --emit-keys cannot be combined");
  if (c.emit_keys && (c.workload.size() != 1 || (c.n.size() != 1 && c.trap_height == 0))) {
    throw ConfigError("--emit-keys needs exactly one workload and one size");
  }
}

}  // namespace ffbench
