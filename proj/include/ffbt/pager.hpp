#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "ffbt/node_store.hpp"
#include "ffbt/types.hpp"

namespace ffbt {

/// Synthetic device latencies charged by a pager: one read latency per first
/// access of a node, one write latency per dirty node flushed at end_op.
struct LatencyConfig {
  std::chrono::nanoseconds read{0};
  std::chrono::nanoseconds write{0};

  bool enabled() const noexcept { return read.count() > 0 || write.count() > 0; }
};

/// Busy-waits for `d`; sleeping is far too coarse for microsecond latencies.
void spin_for(std::chrono::nanoseconds d) noexcept;

/// Nodes touched by the operation in flight.
struct OpBuffer {
  std::vector<NodeId> resident;
  std::vector<NodeId> dirty;
  // Nodes whose page header (critical flag, child bitmap) changed.
  std::vector<NodeId> header;
  // Nodes created by the operation (also resident and dirty).
  std::vector<NodeId> allocated;

  bool is_resident(NodeId id) const noexcept;
  bool is_dirty(NodeId id) const noexcept;
};

/// Per-operation I/O accounting over a NodeStore. Every operation starts with
/// an empty buffer; the first fetch of a node costs one read, and every node
/// dirtied during the operation costs one write when the operation ends.
/// Pages whose only change is header metadata are flushed too, but are
/// reported as header writes rather than as structural writes.
///
/// A pager is single-threaded. Concurrent actors each own one, all bound to
/// the same store.
class Pager {
 public:
  explicit Pager(NodeStore& store, LatencyConfig latency = {});

  const OpBuffer& begin_op();
  Node& fetch(NodeId id);
  /// Like fetch, but returns nullptr instead of throwing for unknown ids.
  /// Optimistic readers can follow torn child pointers.
  Node* try_fetch(NodeId id);
  void mark_dirty(NodeId id);
  /// Records a header-only change; free when the node is dirty anyway.
  void mark_header(NodeId id);
  NodeId allocate(NodeKind kind);
  IoReport end_op();

  bool in_op() const noexcept { return in_op_; }
  const OpBuffer& buffer() const noexcept { return buffer_; }
  /// Counters of the operation in flight.
  IoReport current() const noexcept;

  NodeStore& store() const noexcept { return *store_; }
  const LatencyConfig& latency() const noexcept { return latency_; }

 private:
  void require_op(const char* what) const;

  NodeStore* store_;
  LatencyConfig latency_;
  OpBuffer buffer_;
  std::uint64_t reads_ = 0;
  bool in_op_ = false;
};

}  // namespace ffbt
