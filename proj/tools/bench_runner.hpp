#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bench_config.hpp"

namespace ffbench {

/// An invariant broke mid-run. `index` is the 0-based insert position when
/// the breach is tied to one insert.
class RunFailure : public std::runtime_error {
 public:
  RunFailure(std::string invariant, std::optional<std::uint64_t> index, std::string run, const std::string& detail);

  const std::string& invariant() const noexcept { return invariant_; }
  std::optional<std::uint64_t> index() const noexcept { return index_; }
  const std::string& run() const noexcept { return run_; }

 private:
  std::string invariant_;
  std::optional<std::uint64_t> index_;
  std::string run_;
};

/// Runs every (variant x key stream) pair of the config on a fresh tree and
/// writes the artifacts under config.out:
///   <variant>-<stream>/{per_height,ccdf,topk,binned_max,utilization}.csv
///   <variant>-<stream>/summary.json
///   <variant>-<stream>/concurrent.csv  (when actor counts are configured)
///   run.json                           (manifest)
/// Returns the manifest. Progress goes to `log`.
nlohmann::json run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace ffbench
