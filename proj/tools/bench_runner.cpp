#include "bench_runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "ffbt/errors.hpp"
#include "ffbt/ffbtree.hpp"
#include "ffbt/metrics.hpp"
#include "ffbt/olc.hpp"
#include "ffbt/tree.hpp"
#include "ffbt/workloads.hpp"

#ifndef FFBT_BUILD_ID
#define FFBT_BUILD_ID "unknown"
#endif

namespace ffbench {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ffbt;

RunFailure::RunFailure(std::string invariant, std::optional<std::uint64_t> index, std::string run,
                       const std::string& detail)
    : std::runtime_error(detail), invariant_(std::move(invariant)), index_(index), run_(std::move(run)) {}

namespace {

struct Stream {
  std::string label;
  std::string workload;
  std::vector<Key> keys;
  std::vector<workloads::Trap> traps;
};

std::vector<Stream> build_streams(const ExperimentConfig& c, std::ostream& log) {
  std::vector<Stream> streams;
  if (c.replay) {
    Stream s;
    s.label = "replay-" + c.replay->stem().string();
    s.workload = "replay";
    s.keys = workloads::read_keys(*c.replay, c.key_format);
    log << "replaying " << s.keys.size() << " keys from " << c.replay->string() << '\n';
    streams.push_back(std::move(s));
    return streams;
  }
  for (const workloads::Family family : c.workload) {
    const std::string name(workloads::to_string(family));
    if (family == workloads::Family::kClrsAdversary && c.trap_height > 0) {
      workloads::AdversaryRun run = workloads::gen_clrs_trap(c.trap_height, c.capacity, c.key_space);
      streams.push_back(Stream{name + "-trap" + std::to_string(c.trap_height), name, std::move(run.keys),
                               std::move(run.traps)});
      continue;
    }
    for (const std::uint64_t n : c.n) {
      Stream s{name + "-n" + std::to_string(n), name, {}, {}};
      if (family == workloads::Family::kClrsAdversary) {
        workloads::AdversaryRun run = workloads::gen_clrs_adversary(n, c.capacity, c.key_space);
        s.keys = std::move(run.keys);
        s.traps = std::move(run.traps);
      } else {
        workloads::WorkloadSpec spec;
        spec.family = family;
        spec.n = n;
        spec.seed = c.seed;
        spec.direction = c.direction;
        spec.theta = c.theta;
        spec.key_space = c.key_space;
        spec.capacity = c.capacity;
        s.keys = workloads::generate(spec);
      }
      streams.push_back(std::move(s));
    }
  }
  return streams;
}

std::string describe_io(const InsertReport& r) {
  std::ostringstream os;
  os << "total " << r.total << ", splits " << r.splits << ", height " << r.height;
  return os.str();
}

// Cheap checks applied to every insert.
void check_insert(const InsertReport& r, Variant variant, std::uint64_t index, const std::string& run) {
  if (variant == Variant::kFf && r.splits > 1) {
    throw RunFailure("one-split", index, run, "ff insert split " + std::to_string(r.splits) + " nodes");
  }
  if (r.total < r.height + std::uint64_t{1}) {
    throw RunFailure("non-negative-fluctuation", index, run, "insert cost below the floor: " + describe_io(r));
  }
  if (r.splits == 0 && r.total != r.height + std::uint64_t{1}) {
    throw RunFailure("cost-floor", index, run, "zero-split insert off the H+1 floor: " + describe_io(r));
  }
}

// Full-tree sweep.
void check_tree(const Tree& tree, std::uint64_t index, const std::string& run) {
  if (const auto problems = check_structure(tree); !problems.empty()) {
    throw RunFailure("structure", index, run, problems.front());
  }
  if (tree.config().variant != Variant::kFf) return;
  if (const auto unsafe = ff::verify_no_unsafe(tree); !unsafe.ok) {
    std::ostringstream os;
    os << unsafe.offending.size() << " unsafe internal node(s), first " << unsafe.offending.front();
    throw RunFailure("no-unsafe", index, run, os.str());
  }
  if (const auto flags = ff::verify_flag_consistency(tree); !flags.ok) {
    throw RunFailure("flag-consistency", index, run, flags.violations.front());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

template <typename Fn>
void write_csv(const fs::path& path, Fn fn) {
  std::ostringstream os;
  os << std::setprecision(10);
  fn(os);
  write_file(path, os.str());
}

bool wants(const ExperimentConfig& c, const char* metric) {
  return std::find(c.metrics.begin(), c.metrics.end(), metric) != c.metrics.end();
}

json summary_json(const metrics::Summary& s, const Tree& tree, const Stream& stream, Variant variant,
                  const ExperimentConfig& c, const std::vector<InsertReport>& reports, std::uint64_t sweeps) {
  json j;
  j["variant"] = std::string(to_string(variant));
  j["workload"] = stream.workload;
  j["stream"] = stream.label;
  j["inserts"] = s.inserts;
  j["capacity"] = c.capacity;
  j["seed"] = c.seed;
  j["height"] = tree.height();
  j["keys"] = tree.size();
  j["nodes"] = tree.store().size();
  j["max_fluctuation"] = s.max_fluctuation;
  j["max_splits"] = s.max_splits;
  j["max_header_writes"] = s.max_header_writes;
  j["zero_split_inserts"] = s.zero_split_inserts;
  j["floor_mismatches"] = s.floor_mismatches;
  j["invariant_sweeps"] = sweeps;
  if (!reports.empty()) {
    const InsertReport& last = reports.back();
    j["last_insert"] = {{"total", last.total}, {"splits", last.splits}, {"height", last.height},
                        {"fluctuation", last.fluctuation}, {"header_writes", last.header_writes}};
  }
  json ph = json::array();
  for (const auto& [h, st] : s.per_height) {
    ph.push_back({{"height", h}, {"count", st.count}, {"min", st.min}, {"max", st.max}, {"p50", st.p50},
                  {"p95", st.p95}});
  }
  j["per_height"] = ph;
  j["utilization"] = {{"leaves", s.util.leaves},
                      {"internals", s.util.internals},
                      {"pct_below_50_leaf", s.util.pct_below_50_leaf},
                      {"pct_below_50_internal", s.util.pct_below_50_internal},
                      {"mean_leaf_fill", s.util.mean_leaf_fill},
                      {"mean_internal_fill", s.util.mean_internal_fill}};
  json traps = json::array();
  for (const workloads::Trap& t : stream.traps) {
    traps.push_back({{"index", t.index}, {"height", t.height}, {"total", t.report.total}, {"splits", t.report.splits}});
  }
  if (!stream.traps.empty()) j["shadow_traps"] = traps;
  return j;
}

std::chrono::nanoseconds micros(double us) { return std::chrono::nanoseconds(std::llround(us * 1000.0)); }

void run_concurrent_points(const ExperimentConfig& c, const Stream& stream, Variant variant, const fs::path& dir,
                           const std::string& run, std::ostream& log) {
  std::ostringstream csv;
  csv << std::setprecision(10);
  csv << "actors,ops,mean_latency_ns,mean_windowed_range_ns,mean_restarts,max_restarts,max_splits,lost_keys,"
         "structure_violations,unsafe_nodes,wall_seconds\n";
  for (const std::size_t actors : c.actors) {
    Tree tree(TreeConfig{c.capacity, variant});
    olc::ConcurrentConfig cc;
    cc.actors = actors;
    cc.latency = LatencyConfig{micros(c.read_lat), micros(c.write_lat)};
    cc.window = c.window;
    const olc::ConcurrentReport r = olc::run_concurrent(tree, stream.keys, cc);
    const auto lost = olc::missing_keys(tree, stream.keys);
    const auto problems = check_structure(tree);
    std::size_t unsafe = 0;
    if (variant == Variant::kFf) unsafe = ff::verify_no_unsafe(tree).offending.size();
    csv << actors << ',' << r.ops.size() << ',' << r.mean_latency_ns << ',' << r.mean_windowed_range_ns << ','
        << r.mean_restarts << ',' << r.max_restarts << ',' << r.max_splits << ',' << lost.size() << ','
        << problems.size() << ',' << unsafe << ',' << r.wall_seconds << '\n';
    log << "  " << actors << " actor(s): mean latency " << r.mean_latency_ns / 1000.0 << " us, mean restarts "
        << r.mean_restarts << '\n';
    const std::string where = run + " with " + std::to_string(actors) + " actors";
    if (!lost.empty()) {
      throw RunFailure("lost-keys", std::nullopt, where, std::to_string(lost.size()) + " key(s) missing after quiescence");
    }
    if (!problems.empty()) throw RunFailure("structure", std::nullopt, where, problems.front());
    if (unsafe != 0) throw RunFailure("no-unsafe", std::nullopt, where, std::to_string(unsafe) + " unsafe node(s)");
    if (variant == Variant::kFf && r.max_splits > 1) {
      throw RunFailure("one-split", std::nullopt, where, "a committed write phase split more than one node");
    }
  }
  write_file(dir / "concurrent.csv", csv.str());
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

nlohmann::json run_experiment(const ExperimentConfig& c, std::ostream& log) {
  validate(c);
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(c.out);

  json manifest;
  manifest["config"] = to_json(c);
  manifest["seed"] = c.seed;
  manifest["build_id"] = FFBT_BUILD_ID;
  manifest["started_at"] = utc_now();
  manifest["runs"] = json::array();

  const std::vector<Stream> streams = build_streams(c, log);
  if (c.emit_keys) {
    workloads::write_keys(*c.emit_keys, streams.front().keys, c.key_format);
    log << "wrote " << streams.front().keys.size() << " keys to " << c.emit_keys->string() << '\n';
  }

  for (const Stream& stream : streams) {
    for (const Variant variant : c.variant) {
      const std::string run = std::string(to_string(variant)) + "-" + stream.label;
      const fs::path dir = c.out / run;
      fs::create_directories(dir);
      log << run << ": " << stream.keys.size() << " inserts\n";
      const auto run_start = std::chrono::steady_clock::now();

      Tree tree(TreeConfig{c.capacity, variant});
      std::vector<InsertReport> reports;
      reports.reserve(stream.keys.size());
      std::uint64_t sweeps = 0;
      for (std::uint64_t i = 0; i < stream.keys.size(); ++i) {
        InsertReport r;
        try {
          r = tree.insert(stream.keys[i], stream.keys[i]);
        } catch (const InvariantViolation& e) {
          throw RunFailure("insert", i, run, e.what());
        }
        check_insert(r, variant, i, run);
        reports.push_back(r);
        if (c.check_invariants > 0 && (i + 1) % c.check_invariants == 0) {
          check_tree(tree, i, run);
          ++sweeps;
        }
      }
      if (c.check_invariants > 0 && !stream.keys.empty()) {
        check_tree(tree, stream.keys.size() - 1, run);
        ++sweeps;
      }

      const metrics::Summary s = metrics::summarize(reports, tree, c.bins, c.topk);
      if (wants(c, "per_height")) write_csv(dir / "per_height.csv", [&](auto& os) { metrics::write_per_height_csv(os, s.per_height); });
      if (wants(c, "ccdf")) write_csv(dir / "ccdf.csv", [&](auto& os) { metrics::write_ccdf_csv(os, s.fluct_ccdf); });
      if (wants(c, "topk")) write_csv(dir / "topk.csv", [&](auto& os) { metrics::write_top_k_csv(os, s.top_k); });
      if (wants(c, "binned_max")) write_csv(dir / "binned_max.csv", [&](auto& os) { metrics::write_binned_max_csv(os, s.binned_max); });
      if (wants(c, "utilization")) write_csv(dir / "utilization.csv", [&](auto& os) { metrics::write_utilization_csv(os, s.util); });
      const json summary = summary_json(s, tree, stream, variant, c, reports, sweeps);
      write_file(dir / "summary.json", summary.dump(2) + "\n");
      log << "  height " << tree.height() << ", max fluctuation " << s.max_fluctuation << ", max splits "
          << s.max_splits << '\n';

      if (!c.actors.empty()) {
        if (variant == Variant::kBaseline) {
          log << "  concurrent runs skipped: baseline has no concurrent insert\n";
        } else {
          run_concurrent_points(c, stream, variant, dir, run, log);
        }
      }

      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
      manifest["runs"].push_back({{"run", run},
                                  {"dir", dir.string()},
                                  {"variant", std::string(to_string(variant))},
                                  {"workload", stream.workload},
                                  {"inserts", stream.keys.size()},
                                  {"max_fluctuation", s.max_fluctuation},
                                  {"max_splits", s.max_splits},
                                  {"wall_seconds", secs}});
    }
  }

  manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_file(c.out / "run.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace ffbench
