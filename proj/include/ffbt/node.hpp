#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ffbt/types.hpp"
#include "ffbt/version_lock.hpp"

namespace ffbt {

/// Fixed-capacity bitset over child positions. Bits move with their children
/// when separators are inserted or the owning node splits.
class ChildBitmap {
 public:
  ChildBitmap() = default;
  explicit ChildBitmap(std::size_t bits);

  std::size_t capacity() const noexcept { return bits_; }
  bool test(std::size_t pos) const noexcept;
  void set(std::size_t pos, bool value = true) noexcept;
  void reset(std::size_t pos) noexcept { set(pos, false); }
  void clear() noexcept;
  std::size_t count() const noexcept;
  bool any() const noexcept { return count() != 0; }

  // Opens a slot at `pos`, shifting bits at and after it up by one. The top
  // bit falls off and must be clear.
  void insert_at(std::size_t pos, bool value) noexcept;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// One tree page. Key, value and child arrays are allocated once at the
/// node's capacity and never reallocated, so optimistic readers can never
/// step outside them even when they observe a torn size.
class Node {
 public:
  Node(NodeKind kind, std::size_t capacity);

  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  NodeKind kind() const noexcept { return kind_; }
  bool is_leaf() const noexcept { return kind_ == NodeKind::kLeaf; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return std::min<std::size_t>(size_, capacity_); }
  bool empty() const noexcept { return size() == 0; }
  bool full() const noexcept { return size() >= capacity_; }
  /// F(N): free key slots before the next insert.
  std::size_t free_space() const noexcept { return capacity_ - size(); }

  std::span<const Key> keys() const noexcept { return {keys_.get(), size()}; }
  std::span<const Value> values() const noexcept {
    return is_leaf() ? std::span<const Value>{values_.get(), size()} : std::span<const Value>{};
  }
  std::span<const NodeId> children() const noexcept {
    return is_leaf() ? std::span<const NodeId>{} : std::span<const NodeId>{children_.get(), size() + 1};
  }

  Key key(std::size_t i) const noexcept { return keys_[i]; }
  Value value(std::size_t i) const noexcept { return values_[i]; }
  NodeId child(std::size_t i) const noexcept { return children_[i]; }

  /// Number of keys <= key: the routing slot (equal keys go right).
  std::size_t child_slot(Key key) const noexcept;
  NodeId find_next(Key key) const noexcept { return child(child_slot(key)); }
  /// First position whose key is >= key.
  std::size_t lower_bound(Key key) const noexcept;
  /// Position of the child `id`, or children().size() if absent.
  std::size_t slot_of(NodeId id) const noexcept;

  bool critical() const noexcept { return critical_; }
  void set_critical(bool value) noexcept { critical_ = value; }
  const ChildBitmap& bitmap() const noexcept { return bitmap_; }
  ChildBitmap& bitmap() noexcept { return bitmap_; }

  VersionLock& latch() const noexcept { return latch_; }

  // --- leaf mutation ---
  void insert_entry(std::size_t pos, Key key, Value value);
  void set_value(std::size_t pos, Value value) noexcept { values_[pos] = value; }

  // --- internal mutation ---
  /// Inserts `separator` at key position `pos` with `right` as the child just
  /// after it; the new child's bitmap bit starts clear.
  void insert_separator(std::size_t pos, Key separator, NodeId right);
  /// Turns an empty internal node into a root over two children.
  void init_root(NodeId left, Key separator, NodeId right);
  void set_child(std::size_t pos, NodeId id) noexcept { children_[pos] = id; }

  /// Moves the upper part of this node into `right` (empty, same kind and
  /// capacity) and returns the separator for the parent. Leaf: right takes the
  /// upper ceil(n/2) entries and the separator is copied up. Internal: the
  /// middle key is promoted and children and bitmap bits travel with it. Both
  /// halves end with the critical flag clear.
  Key split_into(Node& right);

  /// Internal split promoting keys()[mid] instead of the middle key.
  Key split_internal_at(std::size_t mid, Node& right);

  /// Index of the key an internal split promotes by default: (n - 1) / 2.
  std::size_t default_mid() const noexcept { return size() == 0 ? 0 : (size() - 1) / 2; }

  /// Splits as if (key, value) had first been added at `pos` to a full leaf,
  /// i.e. the classic split of the capacity+1 overflow state.
  Key split_leaf_with(std::size_t pos, Key key, Value value, Node& right);

  /// Internal analogue of split_leaf_with for a separator arriving from a
  /// child split.
  Key split_internal_with(std::size_t pos, Key separator, NodeId new_child, Node& right);

  /// Overwrites a key in place. Test and relabelling plumbing only.
  void overwrite_key(std::size_t pos, Key key) noexcept { keys_[pos] = key; }

 private:
  Key distribute_leaf(std::span<const Key> keys, std::span<const Value> values, Node& right);
  Key distribute_internal(std::size_t mid, std::span<const Key> keys, std::span<const NodeId> children,
                          const std::vector<bool>& bits, Node& right);

  NodeKind kind_;
  std::uint32_t capacity_;
  std::uint32_t size_ = 0;
  bool critical_ = false;
  std::unique_ptr<Key[]> keys_;
  std::unique_ptr<Value[]> values_;
  std::unique_ptr<NodeId[]> children_;
  ChildBitmap bitmap_;
  mutable VersionLock latch_;
};

}  // namespace ffbt
