#include "ffbt/node_store.hpp"

#include <string>

#include "ffbt/errors.hpp"

namespace ffbt {

NodeStore::NodeStore(std::size_t capacity) : capacity_(capacity), chunks_(new std::atomic<Chunk*>[kMaxChunks]) {
  if (capacity < 3) throw ConfigError("node capacity must be at least 3, got " + std::to_string(capacity));
  for (std::size_t i = 0; i < kMaxChunks; ++i) chunks_[i].store(nullptr, std::memory_order_relaxed);
}

NodeStore::~NodeStore() {
  for (std::size_t i = 0; i < kMaxChunks; ++i) delete chunks_[i].load(std::memory_order_relaxed);
}

NodeId NodeStore::allocate(NodeKind kind) {
  auto node = std::make_unique<Node>(kind, capacity_);
  std::lock_guard lock(alloc_mu_);
  const std::uint32_t id = count_.load(std::memory_order_relaxed);
  const std::size_t chunk_index = id >> kChunkBits;
  if (chunk_index >= kMaxChunks) throw CorruptionError("node store exhausted");
  Chunk* chunk = chunks_[chunk_index].load(std::memory_order_relaxed);
  if (chunk == nullptr) {
    chunk = new Chunk();
    chunks_[chunk_index].store(chunk, std::memory_order_release);
  }
  (*chunk)[id & (kChunkSize - 1)] = std::move(node);
  count_.store(id + 1, std::memory_order_release);
  return NodeId{id};
}

Node* NodeStore::try_get(NodeId id) const noexcept {
  if (!id.valid() || id.value >= count_.load(std::memory_order_acquire)) return nullptr;
  const Chunk* chunk = chunks_[id.value >> kChunkBits].load(std::memory_order_acquire);
  return (*chunk)[id.value & (kChunkSize - 1)].get();
}

Node& NodeStore::get(NodeId id) const {
  Node* node = try_get(id);
  if (node == nullptr) throw CorruptionError("unknown node id " + std::to_string(id.value));
  return *node;
}

}  // namespace ffbt
