#include "ffbt/node.hpp"

#include <bit>
#include <cassert>
#include <string>

#include "ffbt/errors.hpp"

namespace ffbt {

ChildBitmap::ChildBitmap(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

bool ChildBitmap::test(std::size_t pos) const noexcept {
  if (pos >= bits_) return false;
  return (words_[pos / 64] >> (pos % 64)) & 1u;
}

void ChildBitmap::set(std::size_t pos, bool value) noexcept {
  assert(pos < bits_);
  const std::uint64_t mask = std::uint64_t{1} << (pos % 64);
  if (value) {
    words_[pos / 64] |= mask;
  } else {
    words_[pos / 64] &= ~mask;
  }
}

void ChildBitmap::clear() noexcept { std::fill(words_.begin(), words_.end(), 0); }

std::size_t ChildBitmap::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

void ChildBitmap::insert_at(std::size_t pos, bool value) noexcept {
  assert(pos < bits_);
  assert(!test(bits_ - 1));
  for (std::size_t i = bits_ - 1; i > pos; --i) set(i, test(i - 1));
  set(pos, value);
}

Node::Node(NodeKind kind, std::size_t capacity)
    : kind_(kind), capacity_(static_cast<std::uint32_t>(capacity)), keys_(new Key[capacity]()) {
  if (capacity < 3) throw ConfigError("node capacity must be at least 3, got " + std::to_string(capacity));
  if (is_leaf()) {
    values_.reset(new Value[capacity]());
  } else {
    children_.reset(new NodeId[capacity + 1]());
    bitmap_ = ChildBitmap(capacity + 1);
  }
}

std::size_t Node::child_slot(Key key) const noexcept {
  const auto ks = keys();
  return static_cast<std::size_t>(std::upper_bound(ks.begin(), ks.end(), key) - ks.begin());
}

std::size_t Node::lower_bound(Key key) const noexcept {
  const auto ks = keys();
  return static_cast<std::size_t>(std::lower_bound(ks.begin(), ks.end(), key) - ks.begin());
}

std::size_t Node::slot_of(NodeId id) const noexcept {
  const auto cs = children();
  return static_cast<std::size_t>(std::find(cs.begin(), cs.end(), id) - cs.begin());
}

void Node::insert_entry(std::size_t pos, Key key, Value value) {
  if (!is_leaf()) throw InvariantViolation("insert_entry on an internal node");
  if (full()) throw InvariantViolation("insert_entry into a full leaf");
  const std::size_t n = size();
  std::copy_backward(keys_.get() + pos, keys_.get() + n, keys_.get() + n + 1);
  std::copy_backward(values_.get() + pos, values_.get() + n, values_.get() + n + 1);
  keys_[pos] = key;
  values_[pos] = value;
  size_ = static_cast<std::uint32_t>(n + 1);
}

void Node::insert_separator(std::size_t pos, Key separator, NodeId right) {
  if (is_leaf()) throw InvariantViolation("insert_separator on a leaf");
  if (full()) throw InvariantViolation("insert_separator into a full internal node");
  const std::size_t n = size();
  std::copy_backward(keys_.get() + pos, keys_.get() + n, keys_.get() + n + 1);
  std::copy_backward(children_.get() + pos + 1, children_.get() + n + 1, children_.get() + n + 2);
  keys_[pos] = separator;
  children_[pos + 1] = right;
  bitmap_.insert_at(pos + 1, false);
  size_ = static_cast<std::uint32_t>(n + 1);
}

void Node::init_root(NodeId left, Key separator, NodeId right) {
  if (is_leaf() || size() != 0) throw InvariantViolation("init_root needs an empty internal node");
  keys_[0] = separator;
  children_[0] = left;
  children_[1] = right;
  bitmap_.clear();
  size_ = 1;
}

Key Node::distribute_leaf(std::span<const Key> keys, std::span<const Value> values, Node& right) {
  const std::size_t n = keys.size();
  const std::size_t left_n = n / 2;
  const std::size_t right_n = n - left_n;
  if (right_n > right.capacity_ || left_n > capacity_) throw InvariantViolation("leaf split overflows a half");
  // `keys` may alias this node's storage; fill right first.
  std::copy(keys.begin() + left_n, keys.end(), right.keys_.get());
  std::copy(values.begin() + left_n, values.end(), right.values_.get());
  right.size_ = static_cast<std::uint32_t>(right_n);
  std::copy(keys.begin(), keys.begin() + left_n, keys_.get());
  std::copy(values.begin(), values.begin() + left_n, values_.get());
  size_ = static_cast<std::uint32_t>(left_n);
  critical_ = false;
  right.critical_ = false;
  return right.keys_[0];
}

Key Node::distribute_internal(std::size_t mid, std::span<const Key> keys, std::span<const NodeId> children,
                              const std::vector<bool>& bits, Node& right) {
  const std::size_t n = keys.size();
  if (mid >= n) throw InvariantViolation("internal split point out of range");
  const Key separator = keys[mid];
  const std::size_t right_n = n - mid - 1;
  if (right_n > right.capacity_ || mid > capacity_) throw InvariantViolation("internal split overflows a half");
  std::copy(keys.begin() + mid + 1, keys.end(), right.keys_.get());
  std::copy(children.begin() + mid + 1, children.end(), right.children_.get());
  right.bitmap_.clear();
  for (std::size_t i = 0; i <= right_n; ++i) right.bitmap_.set(i, bits[mid + 1 + i]);
  right.size_ = static_cast<std::uint32_t>(right_n);

  std::copy(keys.begin(), keys.begin() + mid, keys_.get());
  std::copy(children.begin(), children.begin() + mid + 1, children_.get());
  bitmap_.clear();
  for (std::size_t i = 0; i <= mid; ++i) bitmap_.set(i, bits[i]);
  size_ = static_cast<std::uint32_t>(mid);
  critical_ = false;
  right.critical_ = false;
  return separator;
}

Key Node::split_into(Node& right) {
  if (right.kind_ != kind_ || !right.empty()) throw InvariantViolation("split target must be an empty node of the same kind");
  const std::size_t n = size();
  if (is_leaf()) {
    if (n < 2) throw InvariantViolation("cannot split a leaf with fewer than 2 keys");
    std::vector<Key> ks(keys_.get(), keys_.get() + n);
    std::vector<Value> vs(values_.get(), values_.get() + n);
    return distribute_leaf(ks, vs, right);
  }
  return split_internal_at(default_mid(), right);
}

Key Node::split_internal_at(std::size_t mid, Node& right) {
  if (is_leaf() || right.is_leaf() || !right.empty()) throw InvariantViolation("split_internal_at needs two internal nodes");
  const std::size_t n = size();
  if (n < 2) throw InvariantViolation("cannot split an internal node with fewer than 2 keys");
  std::vector<Key> ks(keys_.get(), keys_.get() + n);
  std::vector<NodeId> cs(children_.get(), children_.get() + n + 1);
  std::vector<bool> bits(n + 1);
  for (std::size_t i = 0; i <= n; ++i) bits[i] = bitmap_.test(i);
  return distribute_internal(mid, ks, cs, bits, right);
}

Key Node::split_leaf_with(std::size_t pos, Key key, Value value, Node& right) {
  if (!is_leaf() || !right.is_leaf() || !right.empty()) throw InvariantViolation("split_leaf_with needs two leaves");
  const std::size_t n = size();
  std::vector<Key> ks(keys_.get(), keys_.get() + n);
  std::vector<Value> vs(values_.get(), values_.get() + n);
  ks.insert(ks.begin() + static_cast<std::ptrdiff_t>(pos), key);
  vs.insert(vs.begin() + static_cast<std::ptrdiff_t>(pos), value);
  return distribute_leaf(ks, vs, right);
}

Key Node::split_internal_with(std::size_t pos, Key separator, NodeId new_child, Node& right) {
  if (is_leaf() || right.is_leaf() || !right.empty()) throw InvariantViolation("split_internal_with needs two internal nodes");
  const std::size_t n = size();
  std::vector<Key> ks(keys_.get(), keys_.get() + n);
  std::vector<NodeId> cs(children_.get(), children_.get() + n + 1);
  std::vector<bool> bits(n + 1);
  for (std::size_t i = 0; i <= n; ++i) bits[i] = bitmap_.test(i);
  ks.insert(ks.begin() + static_cast<std::ptrdiff_t>(pos), separator);
  cs.insert(cs.begin() + static_cast<std::ptrdiff_t>(pos) + 1, new_child);
  bits.insert(bits.begin() + static_cast<std::ptrdiff_t>(pos) + 1, false);
  return distribute_internal((ks.size() - 1) / 2, ks, cs, bits, right);
}

}  // namespace ffbt
