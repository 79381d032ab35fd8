#include "ffbt/olc.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <latch>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "ffbt/clrs.hpp"
#include "ffbt/errors.hpp"
#include "ffbt/ffbtree.hpp"
#include "ffbt/metrics.hpp"

namespace ffbt::olc {

namespace {

using Clock = std::chrono::steady_clock;

// Longer than any real path; a torn read can otherwise send a descent around
// in circles until validation catches it.
constexpr std::size_t kMaxDepth = 96;

struct Cancelled {};

// Waits out a writer holding `lock` and returns the unlocked version.
std::uint64_t stable_version(const VersionLock& lock, const std::atomic<bool>* stop) {
  for (;;) {
    const std::uint64_t v = lock.load();
    if (!VersionLock::is_locked(v)) return v;
    if (stop != nullptr && stop->load(std::memory_order_relaxed)) throw Cancelled{};
    std::this_thread::yield();
  }
}

struct ReadPhase {
  std::uint64_t root_version = 0;
  Descent descent;
  std::vector<VersionedAccess> seen;
};

std::optional<ReadPhase> optimistic_descent(Tree& tree, Pager& pager, Key key, const std::atomic<bool>* stop) {
  ReadPhase rp;
  rp.root_version = stable_version(tree.root_latch(), stop);
  NodeId cur = tree.root();
  if (!tree.root_latch().validate(rp.root_version)) return std::nullopt;
  for (;;) {
    Node* node = pager.try_fetch(cur);
    if (node == nullptr) return std::nullopt;
    const std::uint64_t v = stable_version(node->latch(), stop);
    rp.descent.path.push_back(cur);
    rp.seen.push_back(VersionedAccess{cur, v});
    if (node->is_leaf()) return rp;
    const NodeId next = node->find_next(key);
    if (!node->latch().validate(v) || rp.descent.path.size() > kMaxDepth) return std::nullopt;
    cur = next;
  }
}

bool still_valid(const Tree& tree, const ReadPhase& rp) {
  if (!tree.root_latch().validate(rp.root_version)) return false;
  return std::all_of(rp.seen.begin(), rp.seen.end(),
                     [&](const VersionedAccess& a) { return tree.peek(a.node).latch().validate(a.observed_version); });
}

// What the write phase will lock: path positions, ascending, plus the root
// latch when the root is replaced.
struct WriteSet {
  std::vector<std::size_t> positions;
  bool root_change = false;
  // Variant-specific plan, carried to the write phase.
  ff::Plan ff_plan;
  std::vector<std::size_t> clrs_splits;
};

WriteSet plan_writes(Tree& tree, Pager& pager, const ReadPhase& rp, Key key) {
  WriteSet ws;
  const auto& path = rp.descent.path;
  if (tree.config().variant == Variant::kFf) {
    ws.ff_plan.descent = rp.descent;
    ws.ff_plan.ctx = ff::analyze_path(pager, rp.descent);
    const ff::Footprint fp = ff::footprint(pager, ws.ff_plan, key);
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (fp.contains(path[i])) ws.positions.push_back(i);
    }
    ws.root_change = fp.root_change;
  } else {
    ws.clrs_splits = clrs::full_on_path(pager, rp.descent);
    ws.positions.push_back(path.size() - 1);
    for (const std::size_t i : ws.clrs_splits) {
      ws.positions.push_back(i);
      if (i > 0) ws.positions.push_back(i - 1);
    }
    std::sort(ws.positions.begin(), ws.positions.end());
    ws.positions.erase(std::unique(ws.positions.begin(), ws.positions.end()), ws.positions.end());
    ws.root_change = !ws.clrs_splits.empty() && ws.clrs_splits.front() == 0;
  }
  return ws;
}

// Exclusive locks held by one write phase. Releasing bumps the version of
// every node the phase changed.
class LockSet {
 public:
  explicit LockSet(Tree& tree) : tree_(tree) {}
  LockSet(const LockSet&) = delete;
  LockSet& operator=(const LockSet&) = delete;
  ~LockSet() { release(nullptr); }

  bool acquire_root(std::uint64_t observed) {
    if (!tree_.root_latch().try_upgrade(observed)) return false;
    root_ = true;
    return true;
  }

  bool acquire(NodeId id, std::uint64_t observed) {
    if (!tree_.peek(id).latch().try_upgrade(observed)) return false;
    nodes_.push_back(id);
    return true;
  }

  bool holds(NodeId id) const { return std::find(nodes_.begin(), nodes_.end(), id) != nodes_.end(); }

  // With a buffer, only nodes it dirtied or re-headed count as changed; without
  // one (error paths) every held node is treated as changed so that optimistic
  // readers restart.
  void release(const OpBuffer* changed) {
    for (const NodeId id : nodes_) {
      VersionLock& latch = tree_.peek(id).latch();
      const bool modified = changed == nullptr || changed->is_dirty(id) ||
                            std::find(changed->header.begin(), changed->header.end(), id) != changed->header.end();
      if (modified) {
        latch.unlock_committed();
      } else {
        latch.unlock_unchanged();
      }
    }
    nodes_.clear();
    if (root_) tree_.root_latch().unlock_committed();
    root_ = false;
  }

 private:
  Tree& tree_;
  std::vector<NodeId> nodes_;
  bool root_ = false;
};

void check_write_set(const OpBuffer& buf, const LockSet& locks) {
  auto owned = [&](NodeId id) {
    return locks.holds(id) || std::find(buf.allocated.begin(), buf.allocated.end(), id) != buf.allocated.end();
  };
  for (const auto* list : {&buf.dirty, &buf.header}) {
    for (const NodeId id : *list) {
      if (!owned(id)) {
        std::ostringstream msg;
        msg << "write phase modified " << id << " without holding its lock";
        throw ProtocolError(msg.str());
      }
    }
  }
}

// One attempt. Returns the committed report, or nothing when the attempt has
// to be restarted. The pager's operation is always closed on return.
std::optional<InsertReport> attempt(Tree& tree, Pager& pager, Key key, Value value, const std::atomic<bool>* stop) {
  pager.begin_op();
  struct CloseOp {
    Pager& p;
    ~CloseOp() {
      if (p.in_op()) p.end_op();
    }
  } close{pager};

  const std::optional<ReadPhase> rp = optimistic_descent(tree, pager, key, stop);
  if (!rp) return std::nullopt;

  WriteSet ws;
  try {
    ws = plan_writes(tree, pager, *rp, key);
  } catch (const std::exception&) {
    // Planning on torn state can trip over nonsense; only a clean read counts.
    if (!still_valid(tree, *rp)) return std::nullopt;
    throw;
  }

  LockSet locks(tree);
  if (ws.root_change && !locks.acquire_root(rp->root_version)) return std::nullopt;
  for (const std::size_t i : ws.positions) {
    if (!locks.acquire(rp->seen[i].node, rp->seen[i].observed_version)) {
      locks.release(&pager.buffer());
      return std::nullopt;
    }
  }
  // try_upgrade already validated the locked nodes; the rest must not have moved.
  bool moved = !ws.root_change && !tree.root_latch().validate(rp->root_version);
  for (std::size_t i = 0; i < rp->seen.size() && !moved; ++i) {
    if (locks.holds(rp->seen[i].node)) continue;
    moved = !tree.peek(rp->seen[i].node).latch().validate(rp->seen[i].observed_version);
  }
  if (moved) {
    locks.release(&pager.buffer());
    return std::nullopt;
  }

  std::uint32_t splits = 0;
  try {
    if (tree.config().variant == Variant::kFf) {
      splits = ff::apply(tree, pager, ws.ff_plan, key, value).splits;
      if (splits > 1) throw InvariantViolation("ff insert split " + std::to_string(splits) + " nodes");
    } else {
      splits = clrs::apply(tree, pager, rp->descent, ws.clrs_splits, key, value);
    }
    check_write_set(pager.buffer(), locks);
  } catch (...) {
    locks.release(nullptr);
    throw;
  }
  // Flush (and pay the write latency) before anyone can see the new state.
  const OpBuffer changed = pager.buffer();
  const IoReport io = pager.end_op();
  locks.release(&changed);
  return Tree::make_report(io, splits, rp->descent.height());
}

OpSample insert_with(Tree& tree, Pager& pager, Key key, Value value, const std::atomic<bool>* stop,
                     Clock::time_point epoch) {
  if (tree.config().variant == Variant::kBaseline) {
    throw ConfigError("concurrent inserts support the clrs and ff variants only");
  }
  const auto start = Clock::now();
  OpSample s;
  s.key = key;
  for (;;) {
    if (auto io = attempt(tree, pager, key, value, stop)) {
      s.io = *io;
      break;
    }
    ++s.restarts;
    std::this_thread::yield();
  }
  const auto end = Clock::now();
  s.latency_ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(end - start).count());
  s.finished_ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(end - epoch).count());
  return s;
}

}  // namespace

OpSample olc_insert(Tree& tree, Pager& pager, Key key, Value value) {
  return insert_with(tree, pager, key, value, nullptr, Clock::now());
}

ConcurrentReport run_concurrent(Tree& tree, std::span<const Key> keys, const ConcurrentConfig& config) {
  if (config.actors == 0) throw ConfigError("run_concurrent needs at least one actor");
  if (config.window == 0) throw ConfigError("latency window must be positive");
  if (tree.config().variant == Variant::kBaseline) {
    throw ConfigError("concurrent inserts support the clrs and ff variants only");
  }

  const std::size_t actors = config.actors;
  std::vector<std::vector<OpSample>> local(actors);
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::latch ready(static_cast<std::ptrdiff_t>(actors) + 1);
  Clock::time_point epoch;
  std::atomic<bool> go{false};

  auto body = [&](std::size_t a) {
    Pager pager(tree.store(), config.latency);
    local[a].reserve(keys.size() / actors + 1);
    ready.count_down();
    while (!go.load(std::memory_order_acquire)) std::this_thread::yield();
    try {
      for (std::size_t i = a; i < keys.size(); i += actors) {
        if (stop.load(std::memory_order_relaxed)) return;
        OpSample s = insert_with(tree, pager, keys[i], keys[i], &stop, epoch);
        s.actor = static_cast<std::uint32_t>(a);
        local[a].push_back(s);
      }
    } catch (const Cancelled&) {
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      stop.store(true);
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(actors);
  for (std::size_t a = 0; a < actors; ++a) threads.emplace_back(body, a);
  ready.arrive_and_wait();
  epoch = Clock::now();
  go.store(true, std::memory_order_release);
  for (std::thread& t : threads) t.join();
  const auto end = Clock::now();
  if (failure) std::rethrow_exception(failure);

  ConcurrentReport report;
  report.actors = actors;
  report.wall_seconds = std::chrono::duration<double>(end - epoch).count();
  for (auto& l : local) report.ops.insert(report.ops.end(), l.begin(), l.end());
  std::stable_sort(report.ops.begin(), report.ops.end(),
                   [](const OpSample& a, const OpSample& b) { return a.finished_ns < b.finished_ns; });
  if (report.ops.size() != keys.size()) throw InvariantViolation("concurrent run lost operations");

  std::vector<std::uint64_t> latencies;
  latencies.reserve(report.ops.size());
  double lat_sum = 0.0;
  double restart_sum = 0.0;
  for (const OpSample& s : report.ops) {
    latencies.push_back(s.latency_ns);
    lat_sum += static_cast<double>(s.latency_ns);
    restart_sum += s.restarts;
    report.max_restarts = std::max(report.max_restarts, s.restarts);
    report.max_splits = std::max(report.max_splits, s.io.splits);
  }
  if (!report.ops.empty()) {
    const double n = static_cast<double>(report.ops.size());
    report.mean_latency_ns = lat_sum / n;
    report.mean_restarts = restart_sum / n;
    report.mean_windowed_range_ns = metrics::windowed_range(latencies, config.window).mean;
  }
  return report;
}

std::vector<Key> missing_keys(const Tree& tree, std::span<const Key> keys) {
  const std::vector<Key> stored = scan_all(tree);
  std::vector<Key> missing;
  for (const Key k : keys) {
    if (!std::binary_search(stored.begin(), stored.end(), k)) missing.push_back(k);
  }
  return missing;
}

}  // namespace ffbt::olc
