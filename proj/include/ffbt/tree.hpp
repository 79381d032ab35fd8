#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ffbt/node_store.hpp"
#include "ffbt/pager.hpp"
#include "ffbt/types.hpp"
#include "ffbt/version_lock.hpp"

namespace ffbt {

struct TreeConfig {
  std::size_t capacity = 8;
  Variant variant = Variant::kFf;
};

/// Root-to-leaf node ids visited by one descent. path.front() is the root the
/// descent started from and path.back() the leaf.
struct Descent {
  std::vector<NodeId> path;

  NodeId leaf() const { return path.back(); }
  std::uint32_t height() const { return static_cast<std::uint32_t>(path.size()); }
};

struct SplitResult {
  NodeId left;
  NodeId right;
  Key separator;
};

/// Height-balanced B+-tree over a node store. The tree starts as one empty
/// leaf root of height 1. Insertion algorithms live in their own modules and
/// drive the tree through a Pager; Tree::insert dispatches on the configured
/// variant using the tree's own pager.
class Tree {
 public:
  explicit Tree(TreeConfig config);

  Tree(const Tree&) = delete;
  Tree& operator=(const Tree&) = delete;

  const TreeConfig& config() const noexcept { return config_; }
  std::size_t capacity() const noexcept { return config_.capacity; }
  NodeStore& store() noexcept { return store_; }
  const NodeStore& store() const noexcept { return store_; }
  Pager& pager() noexcept { return pager_; }

  NodeId root() const noexcept { return root_.load(std::memory_order_acquire); }
  std::uint32_t height() const noexcept { return height_.load(std::memory_order_acquire); }
  /// Number of distinct keys stored.
  std::size_t size() const noexcept { return size_.load(std::memory_order_relaxed); }
  /// Uncharged node access for verification and generators.
  const Node& peek(NodeId id) const { return store_.get(id); }
  Node& peek_mutable(NodeId id) { return store_.get(id); }

  InsertReport insert(Key key, Value value);

  /// Point lookup through the tree's pager; charges one read per level.
  std::optional<Value> lookup(Key key);
  const IoReport& last_io() const noexcept { return last_io_; }

  /// Guards root replacement when actors share the tree.
  VersionLock& root_latch() const noexcept { return root_latch_; }

  // --- primitives shared by the insertion variants ---

  /// Fetches root to leaf along `key`'s route.
  Descent descend(Pager& pager, Key key) const;

  /// Puts (key, value) into a leaf with free space, or overwrites the value
  /// of an existing key. Returns true when a new key was added.
  bool put_in_leaf(Pager& pager, NodeId leaf, Key key, Value value);

  /// Splits `node` into itself and a fresh right sibling. Both halves are
  /// dirtied and left with the critical flag clear.
  SplitResult split_node(Pager& pager, NodeId node, std::optional<std::size_t> mid = std::nullopt);

  /// Splits `node` and hangs the new sibling under `parent`, which must have
  /// a free slot; an invalid parent means `node` is the root and a new root is
  /// installed. The parent's bitmap bit for `node` is cleared.
  /// `mid` overrides the promoted key of an internal split.
  SplitResult split_child(Pager& pager, NodeId parent, NodeId node, std::optional<std::size_t> mid = std::nullopt);

  /// split_child for a leaf that also receives (key, value): the capacity+1
  /// state is divided, so neither half is full afterwards.
  SplitResult split_leaf_inserting(Pager& pager, NodeId parent, NodeId leaf, Key key, Value value);

  /// Installs a new root over two children (height + 1). Returns the new id.
  NodeId grow_root(Pager& pager, NodeId left, Key separator, NodeId right);

  /// Combines measured I/O with the split count and the start height.
  static InsertReport make_report(const IoReport& io, std::uint32_t splits, std::uint32_t height);

  void note_new_key() noexcept { size_.fetch_add(1, std::memory_order_relaxed); }

  /// Replaces the tree's contents with an externally built node graph rooted
  /// at `root`. Test fixtures only; nothing is checked.
  void install_root(NodeId root, std::uint32_t height, std::size_t keys) noexcept {
    root_.store(root, std::memory_order_release);
    height_.store(height, std::memory_order_release);
    size_.store(keys, std::memory_order_relaxed);
  }

 private:
  TreeConfig config_;
  NodeStore store_;
  Pager pager_;
  std::atomic<NodeId> root_;
  std::atomic<std::uint32_t> height_{1};
  std::atomic<std::size_t> size_{0};
  mutable VersionLock root_latch_;
  IoReport last_io_;
};

/// In-order keys of every leaf (recursive descent, uncharged).
std::vector<Key> scan_all(const Tree& tree);

/// Structural problems found by check_structure; empty means healthy.
std::vector<std::string> check_structure(const Tree& tree);

}  // namespace ffbt
