// ffbench: runs insertion experiments and writes CSV/JSON artifacts.
//
// Exit status: 0 success, 1 runtime failure, 2 bad configuration or key
// file, 3 invariant violation.

#include <charconv>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bench_config.hpp"
#include "bench_runner.hpp"
#include "ffbt/errors.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace ffbench;
  CLI::App app{"Insertion I/O fluctuation benchmark for B+-tree variants"};
  app.option_defaults()->always_capture_default(false);

  std::string config_path;
  std::vector<std::string> variants, workloads_, metrics_;
  std::vector<std::uint64_t> sizes;
  std::vector<std::size_t> actors;
  std::size_t capacity = 0, bins = 0, topk = 0, window = 0;
  std::uint64_t seed = 0, key_space = 0;
  std::uint32_t trap_height = 0;
  double theta = 0, read_lat = 0, write_lat = 0;
  std::string direction, out, replay, emit_keys, key_format;
  bool print_config = false;

  app.add_option("--config", config_path, "JSON config; flags given on the command line override it")
      ->check(CLI::ExistingFile);
  auto* o_variant = app.add_option("--variant", variants, "baseline, clrs, ff (comma-separated)")->delimiter(',');
  auto* o_workload =
      app.add_option("--workload", workloads_, "sequential, uniform, zipfian, clrs_adversary (comma-separated)")
          ->delimiter(',');
  auto* o_n = app.add_option("--n", sizes, "insert counts (comma-separated)")->delimiter(',');
  auto* o_capacity = app.add_option("--capacity", capacity, "entries per node (default 8)");
  auto* o_seed = app.add_option("--seed", seed, "workload seed (default 1)");
  auto* o_direction = app.add_option("--direction", direction, "sequential order: asc or desc");
  auto* o_theta = app.add_option("--theta", theta, "Zipfian skew in (0, 2) (default 0.99)");
  auto* o_key_space = app.add_option("--key-space", key_space, "key universe size (default 2^40)");
  auto* o_trap = app.add_option("--trap-height", trap_height, "adversary: stop at the first trap of this height");
  auto* o_metrics = app.add_option("--metrics", metrics_, "CSV files to write (default all)")->delimiter(',');
  auto* o_bins = app.add_option("--bins", bins, "binned-max bins (default 1200)");
  auto* o_topk = app.add_option("--topk", topk, "peaks kept in topk.csv (default 100)");
  std::string stride_text;
  auto* o_check = app.add_option("--check-invariants", stride_text,
                                 "full-tree invariant sweep every STRIDE inserts (default stride 1000)")
                      ->expected(0, 1);
  auto* o_actors = app.add_option("--actors", actors, "concurrent actor counts (comma-separated)")->delimiter(',');
  auto* o_read = app.add_option("--read-lat", read_lat, "injected read latency, microseconds (default 1)");
  auto* o_write = app.add_option("--write-lat", write_lat, "injected write latency, microseconds (default 2)");
  auto* o_window = app.add_option("--window", window, "latency-range window in ops (default 100000)");
  auto* o_out = app.add_option("--out", out, "output directory (default results)");
  auto* o_replay = app.add_option("--replay", replay, "insert the keys of FILE instead of generating them");
  auto* o_emit = app.add_option("--emit-keys", emit_keys, "write the generated key stream to FILE");
  auto* o_format = app.add_option("--key-format", key_format, "key file format: text or binary (default text)");
  app.add_flag("--print-config", print_config, "print the resolved config as JSON and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  ExperimentConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    nlohmann::json overrides = nlohmann::json::object();
    if (o_variant->count()) overrides["variant"] = variants;
    if (o_workload->count()) overrides["workload"] = workloads_;
    if (o_n->count()) overrides["n"] = sizes;
    if (o_capacity->count()) overrides["capacity"] = capacity;
    if (o_seed->count()) overrides["seed"] = seed;
    if (o_direction->count()) overrides["direction"] = direction;
    if (o_theta->count()) overrides["theta"] = theta;
    if (o_key_space->count()) overrides["key_space"] = key_space;
    if (o_trap->count()) overrides["trap_height"] = trap_height;
    if (o_metrics->count()) overrides["metrics"] = metrics_;
    if (o_bins->count()) overrides["bins"] = bins;
    if (o_topk->count()) overrides["topk"] = topk;
    if (o_check->count()) {
      std::uint64_t stride = 1000;
      if (!stride_text.empty()) {
        const char* end = stride_text.data() + stride_text.size();
        if (std::from_chars(stride_text.data(), end, stride).ptr != end) {
          throw ffbt::ConfigError("--check-invariants expects a stride, got '" + stride_text + "'");
        }
      }
      overrides["check_invariants"] = stride;
    }
    if (o_actors->count()) overrides["actors"] = actors;
    if (o_read->count()) overrides["read_lat"] = read_lat;
    if (o_write->count()) overrides["write_lat"] = write_lat;
    if (o_window->count()) overrides["window"] = window;
    if (o_out->count()) overrides["out"] = out;
    if (o_replay->count()) overrides["replay"] = replay;
    if (o_emit->count()) overrides["emit_keys"] = emit_keys;
    if (o_format->count()) overrides["key_format"] = key_format;
    config = from_json(overrides, config);
    validate(config);
  } catch (const ffbt::ConfigError& e) {
    std::cerr << "ffbench: " << e.what() << '\n';
    return kExitConfig;
  }

  if (print_config) {
    std::cout << to_json(config).dump(2) << '\n';
    return 0;
  }

  try {
    const auto manifest = run_experiment(config, std::cerr);
    std::cerr << "done in " << manifest["wall_seconds"].get<double>() << " s; artifacts in " << config.out.string()
              << '\n';
  } catch (const RunFailure& e) {
    std::cerr << "ffbench: invariant violated: " << e.invariant();
    if (e.index()) std::cerr << " at insert " << *e.index();
    std::cerr << " (" << e.run() << "): " << e.what() << '\n';
    return kExitInvariant;
  } catch (const ffbt::ConfigError& e) {
    std::cerr << "ffbench: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ffbt::ParseError& e) {
    std::cerr << "ffbench: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "ffbench: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
