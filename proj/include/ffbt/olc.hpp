#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ffbt/pager.hpp"
#include "ffbt/tree.hpp"
#include "ffbt/types.hpp"

/// Optimistic lock coupling around the clrs and ff insert algorithms. An
/// insert first descends without latches, recording each node's version, and
/// plans the mutation from what it saw. The write phase then locks the nodes
/// the plan will modify (the root latch first, then path nodes top-down),
/// revalidates every recorded version, applies the plan and bumps the
/// versions of the nodes it changed. Any failed validation or lock attempt
/// abandons the attempt and restarts the whole insert.
namespace ffbt::olc {

struct VersionedAccess {
  NodeId node;
  std::uint64_t observed_version = 0;
};

/// Default injected latencies: one time unit per read, two per write, with
/// one unit = 1 microsecond.
inline constexpr std::chrono::nanoseconds kDefaultReadLatency{1000};
inline constexpr std::chrono::nanoseconds kDefaultWriteLatency{2000};
inline constexpr std::size_t kDefaultWindow = 100'000;

inline LatencyConfig default_latency() { return LatencyConfig{kDefaultReadLatency, kDefaultWriteLatency}; }

/// One committed insert.
struct OpSample {
  Key key = 0;
  std::uint32_t actor = 0;
  std::uint32_t restarts = 0;
  // Wall time from the first attempt to commit, injected latencies included.
  std::uint64_t latency_ns = 0;
  // Commit time relative to the start of the run; orders the merged samples.
  std::uint64_t finished_ns = 0;
  // I/O of the committing attempt.
  InsertReport io;
};

/// Single insert on a tree that other actors may share. `pager` must be bound
/// to tree.store() and owned by the calling thread. The tree's variant must
/// be clrs or ff.
OpSample olc_insert(Tree& tree, Pager& pager, Key key, Value value);

struct ConcurrentConfig {
  std::size_t actors = 1;
  LatencyConfig latency = default_latency();
  // Window (in ops) of the latency-range statistic.
  std::size_t window = kDefaultWindow;
};

struct ConcurrentReport {
  std::size_t actors = 0;
  // Commit order.
  std::vector<OpSample> ops;
  double mean_latency_ns = 0.0;
  double mean_windowed_range_ns = 0.0;
  double mean_restarts = 0.0;
  std::uint32_t max_restarts = 0;
  std::uint32_t max_splits = 0;
  double wall_seconds = 0.0;
};

/// Inserts `keys` (value = key) with `actors` threads, key i going to actor
/// i mod actors. Each actor keeps its samples locally; they are merged after
/// all actors finish. The first error raised by any actor stops the others
/// and is rethrown.
ConcurrentReport run_concurrent(Tree& tree, std::span<const Key> keys, const ConcurrentConfig& config);

/// Keys of `keys` that a scan of the tree does not return.
std::vector<Key> missing_keys(const Tree& tree, std::span<const Key> keys);

}  // namespace ffbt::olc
