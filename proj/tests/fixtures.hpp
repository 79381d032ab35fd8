#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ffbt/node.hpp"
#include "ffbt/tree.hpp"

namespace fixtures {

using ffbt::Key;
using ffbt::NodeId;

/// A hand-written node: keys plus child shapes (none for a leaf).
struct Shape {
  std::vector<Key> keys;
  std::vector<Shape> children;
};

inline Shape leaf(std::vector<Key> keys) { return Shape{std::move(keys), {}}; }
inline Shape inner(std::vector<Key> keys, std::vector<Shape> children) {
  return Shape{std::move(keys), std::move(children)};
}

namespace detail {

inline NodeId build_rec(ffbt::Tree& tree, const Shape& s, std::size_t* keys, std::uint32_t* depth) {
  auto& store = tree.store();
  if (s.children.empty()) {
    const NodeId id = store.allocate(ffbt::NodeKind::kLeaf);
    ffbt::Node& n = store.get(id);
    for (std::size_t i = 0; i < s.keys.size(); ++i) n.insert_entry(i, s.keys[i], s.keys[i] * 10);
    *keys += s.keys.size();
    *depth = 1;
    return id;
  }
  std::vector<NodeId> kids;
  std::uint32_t d = 0;
  for (const Shape& c : s.children) kids.push_back(build_rec(tree, c, keys, &d));
  const NodeId id = store.allocate(ffbt::NodeKind::kInternal);
  ffbt::Node& n = store.get(id);
  n.init_root(kids[0], s.keys[0], kids[1]);
  for (std::size_t i = 1; i < s.keys.size(); ++i) n.insert_separator(i, s.keys[i], kids[i + 1]);
  *depth = d + 1;
  return id;
}

}  // namespace detail

/// Builds `root` into the tree's store without charging I/O and installs it.
inline NodeId build(ffbt::Tree& tree, const Shape& root) {
  std::size_t keys = 0;
  std::uint32_t height = 0;
  const NodeId id = detail::build_rec(tree, root, &keys, &height);
  tree.install_root(id, height, keys);
  return id;
}

/// Leaf keys [from, from + count).
inline std::vector<Key> run(Key from, std::size_t count) {
  std::vector<Key> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(from + i);
  return out;
}

/// Sets every flag and bitmap bit bottom-up from node state: a full leaf is
/// flagged; an internal node is flagged when its free space does not exceed
/// its number of flagged children.
inline bool settle_all(ffbt::Tree& tree, NodeId id) {
  ffbt::Node& n = tree.peek_mutable(id);
  if (n.is_leaf()) {
    n.set_critical(n.full());
    return n.critical();
  }
  const auto children = n.children();
  for (std::size_t i = 0; i < children.size(); ++i) n.bitmap().set(i, settle_all(tree, children[i]));
  n.set_critical(n.free_space() <= n.bitmap().count());
  return n.critical();
}

inline void settle_all(ffbt::Tree& tree) { settle_all(tree, tree.root()); }

/// Root-to-leaf ids along `key`'s route, read without charging.
inline std::vector<NodeId> path_of(const ffbt::Tree& tree, Key key) {
  std::vector<NodeId> path{tree.root()};
  while (!tree.peek(path.back()).is_leaf()) path.push_back(tree.peek(path.back()).find_next(key));
  return path;
}

/// Expected cost of a bottom-up (split on overflow) insert of a new key:
/// each full node from the leaf upward splits, writing itself and its new
/// sibling, and the first non-full ancestor (or a new root) absorbs the last
/// separator.
struct Expected {
  std::uint64_t total = 0;
  std::uint32_t splits = 0;
};

inline Expected predict_bottom_up(const ffbt::Tree& tree, Key key) {
  const auto path = path_of(tree, key);
  std::uint32_t k = 0;
  for (std::size_t i = path.size(); i-- > 0 && tree.peek(path[i]).full();) ++k;
  return Expected{path.size() + 2 * std::uint64_t{k} + 1, k};
}

/// Expected cost of a top-down preemptive insert of a new key: every full
/// node on the path splits; each split writes the node, its sibling and its
/// parent (or new root), the leaf is written even if it did not split.
inline Expected predict_top_down(const ffbt::Tree& tree, Key key) {
  const auto path = path_of(tree, key);
  std::vector<bool> dirty(path.size() + 1, false);  // index 0: a new root
  std::uint64_t extra = 0;                          // new siblings and roots
  std::uint32_t k = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!tree.peek(path[i]).full()) continue;
    ++k;
    dirty[i + 1] = true;
    ++extra;  // sibling
    if (i == 0) {
      ++extra;  // new root
    } else {
      dirty[i] = true;
    }
  }
  dirty[path.size()] = true;  // leaf (or the half holding the key)
  std::uint64_t writes = extra;
  for (std::size_t i = 1; i < dirty.size(); ++i) writes += dirty[i] ? 1 : 0;
  return Expected{path.size() + writes, k};
}

}  // namespace fixtures
