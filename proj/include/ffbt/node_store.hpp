#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "ffbt/node.hpp"
#include "ffbt/types.hpp"

namespace ffbt {

/// Owns every node of one tree. Nodes have stable addresses and are never
/// freed before the store, so a stale id always resolves to live memory.
/// Allocation is serialized; lookup is lock-free.
class NodeStore {
 public:
  explicit NodeStore(std::size_t capacity);
  ~NodeStore();

  NodeStore(const NodeStore&) = delete;
  NodeStore& operator=(const NodeStore&) = delete;

  std::size_t node_capacity() const noexcept { return capacity_; }

  NodeId allocate(NodeKind kind);

  /// nullptr for ids that were never allocated.
  Node* try_get(NodeId id) const noexcept;
  /// Throws CorruptionError for unknown ids.
  Node& get(NodeId id) const;

  std::size_t size() const noexcept { return count_.load(std::memory_order_acquire); }

 private:
  static constexpr std::size_t kChunkBits = 12;
  static constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
  static constexpr std::size_t kMaxChunks = std::size_t{1} << 16;
  using Chunk = std::array<std::unique_ptr<Node>, kChunkSize>;

  std::size_t capacity_;
  std::mutex alloc_mu_;
  std::unique_ptr<std::atomic<Chunk*>[]> chunks_;
  std::atomic<std::uint32_t> count_{0};
};

}  // namespace ffbt
