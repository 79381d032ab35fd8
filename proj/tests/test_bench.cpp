#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "bench_config.hpp"
#include "bench_runner.hpp"
#include "ffbt/errors.hpp"

using namespace ffbench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("ffbench-test-" + std::to_string(::getpid()) + "-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig small(const fs::path& out) {
  ExperimentConfig c;
  c.variant = {ffbt::Variant::kBaseline, ffbt::Variant::kClrs, ffbt::Variant::kFf};
  c.workload = {ffbt::workloads::Family::kUniform};
  c.n = {3'000};
  c.capacity = 4;
  c.bins = 10;
  c.topk = 5;
  c.check_invariants = 500;
  c.out = out;
  return c;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.variant = {ffbt::Variant::kClrs, ffbt::Variant::kFf};
  c.n = {7};
  c.actors = {1, 4};
  c.replay = "keys.txt";
  c.key_format = ffbt::workloads::KeyFormat::kBinary;
  EXPECT_EQ(from_json(to_json(c)), c);
  EXPECT_EQ(from_json(to_json(ExperimentConfig{})), ExperimentConfig{});
}

TEST(Config, MissingFieldsKeepTheBase) {
  ExperimentConfig base;
  base.capacity = 16;
  const ExperimentConfig c = from_json(json{{"seed", 9}}, base);
  EXPECT_EQ(c.capacity, 16u);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, ScalarsStandInForLists) {
  const ExperimentConfig c = from_json(json{{"variant", "clrs"}, {"n", 5}, {"actors", 2}});
  EXPECT_EQ(c.variant, std::vector<ffbt::Variant>{ffbt::Variant::kClrs});
  EXPECT_EQ(c.n, std::vector<std::uint64_t>{5});
  EXPECT_EQ(c.actors, std::vector<std::size_t>{2});
}

TEST(Config, CheckInvariantsAcceptsBool) {
  EXPECT_EQ(from_json(json{{"check_invariants", true}}).check_invariants, 1000u);
  EXPECT_EQ(from_json(json{{"check_invariants", false}}).check_invariants, 0u);
  EXPECT_EQ(from_json(json{{"check_invariants", 250}}).check_invariants, 250u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(from_json(json{{"capacty", 8}}), ffbt::ConfigError);
  EXPECT_THROW(from_json(json{{"capacity", "eight"}}), ffbt::ConfigError);
  EXPECT_THROW(from_json(json{{"capacity", -1}}), ffbt::ConfigError);
  EXPECT_THROW(from_json(json{{"variant", "btree"}}), ffbt::ConfigError);
  EXPECT_THROW(from_json(json{{"n", json::array()}}), ffbt::ConfigError);
  EXPECT_THROW(from_json(json::array()), ffbt::ConfigError);
}

TEST(Config, ValidateCrossFieldRules) {
  auto bad = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    EXPECT_THROW(validate(c), ffbt::ConfigError);
  };
  EXPECT_NO_THROW(validate(ExperimentConfig{}));
  bad([](ExperimentConfig& c) { c.capacity = 2; });
  bad([](ExperimentConfig& c) { c.bins = 0; });
  bad([](ExperimentConfig& c) { c.window = 0; });
  bad([](ExperimentConfig& c) { c.read_lat = -1; });
  bad([](ExperimentConfig& c) { c.theta = 2.5; });
  bad([](ExperimentConfig& c) { c.actors = {0}; });
  bad([](ExperimentConfig& c) { c.metrics = {"histogram"}; });
  bad([](ExperimentConfig& c) {
    c.replay = "a";
    c.emit_keys = "b";
  });
  bad([](ExperimentConfig& c) { c.emit_keys = "b"; });  // three sizes by default
}

TEST(Config, LoadReportsParseErrors) {
  TempDir dir("cfg");
  std::ofstream(dir.path / "bad.json") << "{ \"capacity\": ";
  EXPECT_THROW(load_config(dir.path / "bad.json"), ffbt::ConfigError);
  std::ofstream(dir.path / "ok.json") << R"({"capacity": 12, "workload": ["zipf"]})";
  const ExperimentConfig c = load_config(dir.path / "ok.json");
  EXPECT_EQ(c.capacity, 12u);
  EXPECT_EQ(c.workload, std::vector<ffbt::workloads::Family>{ffbt::workloads::Family::kZipfian});
  EXPECT_THROW(load_config(dir.path / "missing.json"), ffbt::ConfigError);
}

TEST(Runner, WritesDeterministicArtifacts) {
  TempDir a("run-a"), b("run-b");
  std::ostringstream log;
  const json manifest = run_experiment(small(a.path), log);
  run_experiment(small(b.path), log);
  ASSERT_EQ(manifest["runs"].size(), 3u);
  for (const char* run : {"baseline-uniform-n3000", "clrs-uniform-n3000", "ff-uniform-n3000"}) {
    for (const char* file :
         {"per_height.csv", "ccdf.csv", "topk.csv", "binned_max.csv", "utilization.csv", "summary.json"}) {
      const fs::path pa = a.path / run / file;
      ASSERT_TRUE(fs::exists(pa)) << pa;
      EXPECT_EQ(slurp(pa), slurp(b.path / run / file)) << run << "/" << file;
    }
  }
  const json summary = json::parse(slurp(a.path / "ff-uniform-n3000" / "summary.json"));
  EXPECT_EQ(summary["inserts"], 3000);
  EXPECT_LE(summary["max_splits"].get<int>(), 1);
  EXPECT_EQ(summary["floor_mismatches"], 0);
  EXPECT_GT(summary["invariant_sweeps"].get<int>(), 0);

  const json run = json::parse(slurp(a.path / "run.json"));
  EXPECT_EQ(run["seed"], 1);
  EXPECT_TRUE(run.contains("build_id"));
  EXPECT_TRUE(run.contains("started_at"));
  EXPECT_EQ(from_json(run["config"]), small(a.path));
}

TEST(Runner, MetricSelectionLimitsFiles) {
  TempDir dir("metrics");
  ExperimentConfig c = small(dir.path);
  c.variant = {ffbt::Variant::kFf};
  c.metrics = {"ccdf"};
  std::ostringstream log;
  run_experiment(c, log);
  EXPECT_TRUE(fs::exists(dir.path / "ff-uniform-n3000" / "ccdf.csv"));
  EXPECT_FALSE(fs::exists(dir.path / "ff-uniform-n3000" / "topk.csv"));
}

TEST(Runner, EmittedKeysReplayIdentically) {
  TempDir dir("replay");
  std::ostringstream log;
  ExperimentConfig emit = small(dir.path / "gen");
  emit.variant = {ffbt::Variant::kClrs};
  emit.emit_keys = dir.path / "keys.txt";
  run_experiment(emit, log);

  ExperimentConfig replay = small(dir.path / "rep");
  replay.variant = {ffbt::Variant::kClrs};
  replay.replay = dir.path / "keys.txt";
  run_experiment(replay, log);
  for (const char* file : {"per_height.csv", "ccdf.csv", "topk.csv", "binned_max.csv", "utilization.csv"}) {
    EXPECT_EQ(slurp(dir.path / "gen" / "clrs-uniform-n3000" / file),
              slurp(dir.path / "rep" / "clrs-replay-keys" / file))
        << file;
  }
}

TEST(Runner, ConcurrentPointsWriteOneRowPerActorCount) {
  TempDir dir("conc");
  ExperimentConfig c = small(dir.path);
  c.variant = {ffbt::Variant::kBaseline, ffbt::Variant::kFf};
  c.actors = {1, 3};
  c.read_lat = 0;
  c.write_lat = 0;
  c.window = 100;
  std::ostringstream log;
  run_experiment(c, log);
  EXPECT_FALSE(fs::exists(dir.path / "baseline-uniform-n3000" / "concurrent.csv"));
  const std::string csv = slurp(dir.path / "ff-uniform-n3000" / "concurrent.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(csv.substr(0, csv.find(',')), "actors");
}

TEST(Runner, AdversaryTrapStreamIsLabelledByHeight) {
  TempDir dir("trap");
  ExperimentConfig c = small(dir.path);
  c.variant = {ffbt::Variant::kClrs};
  c.workload = {ffbt::workloads::Family::kClrsAdversary};
  c.trap_height = 3;
  std::ostringstream log;
  run_experiment(c, log);
  const json summary = json::parse(slurp(dir.path / "clrs-clrs_adversary-trap3" / "summary.json"));
  EXPECT_EQ(summary["last_insert"]["splits"], 3);
  EXPECT_EQ(summary["last_insert"]["total"], 10);
}

TEST(RunFailure, CarriesItsContext) {
  const RunFailure f("one-split", 41, "ff-uniform-n10", "split 2 nodes");
  EXPECT_EQ(f.invariant(), "one-split");
  EXPECT_EQ(f.index(), std::optional<std::uint64_t>{41});
  EXPECT_EQ(f.run(), "ff-uniform-n10");
  EXPECT_STREQ(f.what(), "split 2 nodes");
  EXPECT_FALSE(RunFailure("lost-keys", std::nullopt, "r", "x").index().has_value());
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

ExperimentConfig sequential_100k(const fs::path& out, ffbt::Variant v) {
  ExperimentConfig c;
  c.variant = {v};
  c.n = {100'000};
  c.check_invariants = 1000;
  c.out = out;
  return c;
}

}  // namespace

TEST(Runner, FfSequentialCcdfIsCappedAtThree) {
  TempDir dir("ff-seq");
  std::ostringstream log;
  run_experiment(sequential_100k(dir.path, ffbt::Variant::kFf), log);
  const auto rows = read_csv(dir.path / "ff-sequential-n100000" / "ccdf.csv");
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_LE(std::stoll(r[0]), 3);
}

TEST(Runner, BaselineSequentialRangeGrowsWithHeight) {
  TempDir dir("base-seq");
  std::ostringstream log;
  run_experiment(sequential_100k(dir.path, ffbt::Variant::kBaseline), log);
  const auto rows = read_csv(dir.path / "baseline-sequential-n100000" / "per_height.csv");
  ASSERT_GE(rows.size(), 3u);
  // The last height is still filling and has not seen its full-path split.
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) EXPECT_GT(std::stoull(rows[i][6]), std::stoull(rows[i - 1][6]));
}
