#include "ffbt/tree.hpp"

#include <sstream>
#include <string>
#include <unordered_set>

#include "ffbt/baseline.hpp"
#include "ffbt/clrs.hpp"
#include "ffbt/errors.hpp"
#include "ffbt/ffbtree.hpp"

namespace ffbt {

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::kBaseline:
      return "baseline";
    case Variant::kClrs:
      return "clrs";
    case Variant::kFf:
      return "ff";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "baseline" || name == "bplus") return Variant::kBaseline;
  if (name == "clrs") return Variant::kClrs;
  if (name == "ff" || name == "ffbtree") return Variant::kFf;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected baseline, clrs or ff)");
}

Tree::Tree(TreeConfig config) : config_(config), store_(config.capacity), pager_(store_) {
  root_.store(store_.allocate(NodeKind::kLeaf), std::memory_order_release);
}

InsertReport Tree::insert(Key key, Value value) {
  switch (config_.variant) {
    case Variant::kBaseline:
      return baseline::insert(*this, pager_, key, value);
    case Variant::kClrs:
      return clrs::insert(*this, pager_, key, value);
    case Variant::kFf:
      return ff::insert(*this, pager_, key, value);
  }
  throw ConfigError("unknown variant");
}

std::optional<Value> Tree::lookup(Key key) {
  pager_.begin_op();
  const Descent d = descend(pager_, key);
  const Node& leaf = pager_.fetch(d.leaf());
  const std::size_t pos = leaf.lower_bound(key);
  std::optional<Value> found;
  if (pos < leaf.size() && leaf.key(pos) == key) found = leaf.value(pos);
  last_io_ = pager_.end_op();
  return found;
}

Descent Tree::descend(Pager& pager, Key key) const {
  Descent d;
  d.path.reserve(height() + 1);
  NodeId cur = root();
  for (;;) {
    d.path.push_back(cur);
    const Node& node = pager.fetch(cur);
    if (node.is_leaf()) break;
    cur = node.find_next(key);
  }
  return d;
}

bool Tree::put_in_leaf(Pager& pager, NodeId leaf_id, Key key, Value value) {
  Node& leaf = pager.fetch(leaf_id);
  const std::size_t pos = leaf.lower_bound(key);
  pager.mark_dirty(leaf_id);
  if (pos < leaf.size() && leaf.key(pos) == key) {
    leaf.set_value(pos, value);
    return false;
  }
  leaf.insert_entry(pos, key, value);
  note_new_key();
  return true;
}

SplitResult Tree::split_node(Pager& pager, NodeId id, std::optional<std::size_t> mid) {
  Node& node = pager.fetch(id);
  const NodeId right_id = pager.allocate(node.kind());
  Node& right = pager.fetch(right_id);
  const Key separator = mid && !node.is_leaf() ? node.split_internal_at(*mid, right) : node.split_into(right);
  pager.mark_dirty(id);
  return SplitResult{id, right_id, separator};
}

SplitResult Tree::split_child(Pager& pager, NodeId parent_id, NodeId node_id, std::optional<std::size_t> mid) {
  if (!parent_id.valid()) {
    const SplitResult s = split_node(pager, node_id, mid);
    grow_root(pager, s.left, s.separator, s.right);
    return s;
  }
  Node& parent = pager.fetch(parent_id);
  if (parent.full()) {
    std::ostringstream msg;
    msg << "split of " << node_id << " into full parent " << parent_id;
    throw InvariantViolation(msg.str());
  }
  const std::size_t slot = parent.slot_of(node_id);
  if (slot >= parent.children().size()) throw CorruptionError("split_child: node is not a child of the given parent");
  const SplitResult s = split_node(pager, node_id, mid);
  parent.bitmap().reset(slot);
  parent.insert_separator(slot, s.separator, s.right);
  pager.mark_dirty(parent_id);
  return s;
}

SplitResult Tree::split_leaf_inserting(Pager& pager, NodeId parent_id, NodeId leaf_id, Key key, Value value) {
  Node& leaf = pager.fetch(leaf_id);
  const std::size_t pos = leaf.lower_bound(key);
  if (pos < leaf.size() && leaf.key(pos) == key) {
    const SplitResult s = split_child(pager, parent_id, leaf_id);
    put_in_leaf(pager, key >= s.separator ? s.right : s.left, key, value);
    return s;
  }
  if (parent_id.valid() && pager.fetch(parent_id).full()) {
    std::ostringstream msg;
    msg << "split of " << leaf_id << " into full parent " << parent_id;
    throw InvariantViolation(msg.str());
  }
  const NodeId right_id = pager.allocate(NodeKind::kLeaf);
  const Key separator = leaf.split_leaf_with(pos, key, value, pager.fetch(right_id));
  pager.mark_dirty(leaf_id);
  note_new_key();
  if (!parent_id.valid()) {
    grow_root(pager, leaf_id, separator, right_id);
  } else {
    Node& parent = pager.fetch(parent_id);
    const std::size_t slot = parent.slot_of(leaf_id);
    parent.bitmap().reset(slot);
    parent.insert_separator(slot, separator, right_id);
    pager.mark_dirty(parent_id);
  }
  return SplitResult{leaf_id, right_id, separator};
}

NodeId Tree::grow_root(Pager& pager, NodeId left, Key separator, NodeId right) {
  const NodeId id = pager.allocate(NodeKind::kInternal);
  pager.fetch(id).init_root(left, separator, right);
  root_.store(id, std::memory_order_release);
  height_.fetch_add(1, std::memory_order_acq_rel);
  return id;
}

InsertReport Tree::make_report(const IoReport& io, std::uint32_t splits, std::uint32_t height) {
  InsertReport r;
  r.reads = io.reads;
  r.writes = io.writes;
  r.total = io.total;
  r.header_writes = static_cast<std::uint32_t>(io.header_writes);
  r.splits = splits;
  r.height = height;
  r.fluctuation = static_cast<std::int64_t>(io.total) - static_cast<std::int64_t>(height) - 1;
  return r;
}

namespace {

void scan_node(const Tree& tree, NodeId id, std::vector<Key>& out) {
  const Node& node = tree.peek(id);
  if (node.is_leaf()) {
    out.insert(out.end(), node.keys().begin(), node.keys().end());
    return;
  }
  for (NodeId child : node.children()) scan_node(tree, child, out);
}

struct StructureChecker {
  const Tree& tree;
  std::vector<std::string> problems;
  std::unordered_set<NodeId> seen;

  template <typename... Parts>
  void report(NodeId id, const Parts&... parts) {
    std::ostringstream os;
    os << id << ": ";
    (os << ... << parts);
    problems.push_back(os.str());
  }

  void visit(NodeId id, std::uint32_t depth, std::optional<Key> lo, std::optional<Key> hi) {
    const Node* node = tree.store().try_get(id);
    if (node == nullptr) {
      report(id, "dangling child pointer");
      return;
    }
    if (!seen.insert(id).second) {
      report(id, "reachable more than once");
      return;
    }
    const bool is_root = id == tree.root();
    const auto keys = node->keys();
    if (node->size() > tree.capacity()) report(id, "occupancy ", node->size(), " exceeds capacity ", tree.capacity());
    // A two-key internal node splits into a keyless half with one child.
    if (node->is_leaf() && !is_root && keys.empty()) report(id, "non-root leaf holds no keys");
    if (!node->is_leaf() && is_root && keys.empty()) report(id, "internal root holds no keys");
    for (std::size_t i = 1; i < keys.size(); ++i) {
      if (keys[i - 1] >= keys[i]) {
        report(id, "keys not strictly ascending at position ", i);
        break;
      }
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if ((lo && keys[i] < *lo) || (hi && keys[i] >= *hi)) {
        report(id, "key ", keys[i], " outside separator range [", lo ? std::to_string(*lo) : "-inf", ", ",
               hi ? std::to_string(*hi) : "+inf", ")");
        break;
      }
    }
    if (node->is_leaf()) {
      if (depth != tree.height()) report(id, "leaf at depth ", depth, " but tree height is ", tree.height());
      return;
    }
    if (depth >= tree.height()) {
      report(id, "internal node at depth ", depth, " in a tree of height ", tree.height());
      return;
    }
    const auto children = node->children();
    for (std::size_t i = children.size(); i < node->bitmap().capacity(); ++i) {
      if (node->bitmap().test(i)) {
        report(id, "bitmap bit ", i, " set beyond the last child");
        break;
      }
    }
    for (std::size_t i = 0; i < children.size(); ++i) {
      const std::optional<Key> child_lo = i == 0 ? lo : std::optional<Key>(keys[i - 1]);
      const std::optional<Key> child_hi = i == keys.size() ? hi : std::optional<Key>(keys[i]);
      visit(children[i], depth + 1, child_lo, child_hi);
    }
  }
};

}  // namespace

std::vector<Key> scan_all(const Tree& tree) {
  std::vector<Key> out;
  out.reserve(tree.size());
  scan_node(tree, tree.root(), out);
  return out;
}

std::vector<std::string> check_structure(const Tree& tree) {
  StructureChecker checker{tree, {}, {}};
  checker.visit(tree.root(), 1, std::nullopt, std::nullopt);
  return std::move(checker.problems);
}

}  // namespace ffbt
