#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffbt/types.hpp"
#include "ffbt/workloads.hpp"

namespace ffbench {

inline const std::vector<std::string> kAllMetrics = {"per_height", "ccdf", "topk", "binned_max", "utilization"};

/// One experiment matrix. Every JSON key matches a command-line flag with
/// dashes turned into underscores.
struct ExperimentConfig {
  std::vector<ffbt::Variant> variant{ffbt::Variant::kFf};
  std::vector<ffbt::workloads::Family> workload{ffbt::workloads::Family::kSequential};
  std::vector<std::uint64_t> n{10'000, 100'000, 1'000'000};
  std::size_t capacity = 8;
  std::uint64_t seed = 1;
  ffbt::workloads::Direction direction = ffbt::workloads::Direction::kAsc;
  double theta = ffbt::workloads::kDefaultTheta;
  std::uint64_t key_space = ffbt::workloads::kDefaultKeySpace;
  // Adversary only: stop at the first trap of this height instead of after n keys.
  std::uint32_t trap_height = 0;

  std::vector<std::string> metrics = kAllMetrics;
  std::size_t bins = 1200;
  std::size_t topk = 100;
  // 0 disables the periodic full-tree checks.
  std::uint64_t check_invariants = 0;

  // Empty: no concurrent runs.
  std::vector<std::size_t> actors;
  double read_lat = 1.0;   // microseconds
  double write_lat = 2.0;  // microseconds
  std::size_t window = 100'000;

  std::filesystem::path out = "results";
  std::optional<std::filesystem::path> replay;
  std::optional<std::filesystem::path> emit_keys;
  ffbt::workloads::KeyFormat key_format = ffbt::workloads::KeyFormat::kText;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json to_json(const ExperimentConfig& config);

/// Fields missing from `j` keep the values already in `base`. Unknown fields
/// and ill-typed values raise ffbt::ConfigError.
ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base = {});

ExperimentConfig load_config(const std::filesystem::path& path);

/// Cross-field checks; throws ffbt::ConfigError.
void validate(const ExperimentConfig& config);

}  // namespace ffbench
