#include "ffbt/ffbtree.hpp"

#include <algorithm>
#include <sstream>

#include "ffbt/errors.hpp"

namespace ffbt::ff {

std::string_view to_string(NodeClass c) noexcept {
  switch (c) {
    case NodeClass::kSafeNonCritical:
      return "safe";
    case NodeClass::kCritical:
      return "critical";
    case NodeClass::kUnsafe:
      return "unsafe";
  }
  return "?";
}

void examine_node(const Node& node, NodeId id, NodeId parent, DescentContext& ctx) {
  if (node.is_leaf()) {
    if (node.free_space() <= 1) ctx.last_flag = FlagTarget{id, parent};
    return;
  }
  if (node.free_space() <= node.bitmap().count()) {
    ctx.last_critical = id;
    ctx.last_flag = FlagTarget{id, parent};
  }
}

DescentContext analyze_path(Pager& pager, const Descent& descent) {
  DescentContext ctx;
  NodeId parent;
  for (const NodeId id : descent.path) {
    const Node& node = pager.fetch(id);
    if (node.critical()) {
      ctx.last_critical = id;
    } else {
      examine_node(node, id, parent, ctx);
    }
    parent = id;
  }
  return ctx;
}

namespace {

NodeId parent_on_path(const Descent& descent, NodeId node) {
  const auto it = std::find(descent.path.begin(), descent.path.end(), node);
  if (it == descent.path.end()) throw InvariantViolation("proactive split target is not on the descent path");
  return it == descent.path.begin() ? NodeId{} : *(it - 1);
}

void require_parent_slot(Pager& pager, NodeId node, NodeId parent) {
  if (parent.valid() && pager.fetch(parent).free_space() == 0) {
    std::ostringstream msg;
    msg << "proactive split of " << node << " found its parent " << parent << " full";
    throw InvariantViolation(msg.str());
  }
}

bool holds_key(const Node& leaf, Key key) {
  const std::size_t pos = leaf.lower_bound(key);
  return pos < leaf.size() && leaf.key(pos) == key;
}

// The flag a node should carry given its own contents and its bitmap.
bool critical_by_state(const Node& node) {
  if (node.is_leaf()) return node.full();
  return node.free_space() <= node.bitmap().count();
}

void refresh_flag(Pager& pager, NodeId id, Node& node) {
  const bool c = critical_by_state(node);
  if (node.critical() != c) {
    node.set_critical(c);
    pager.mark_header(id);
  }
}

void settle_from(Pager& pager, NodeId start, Key key) {
  std::vector<NodeId> path;
  for (NodeId cur = start;;) {
    path.push_back(cur);
    const Node& node = pager.fetch(cur);
    if (node.is_leaf()) break;
    cur = node.find_next(key);
  }
  for (std::size_t i = path.size(); i-- > 0;) {
    Node& node = pager.fetch(path[i]);
    if (!node.is_leaf()) {
      const auto children = node.children();
      for (std::size_t j = 0; j < children.size(); ++j) {
        const NodeId child = children[j];
        if (!pager.buffer().is_resident(child)) continue;
        Node& c = pager.fetch(child);
        if (i + 1 == path.size() || child != path[i + 1]) refresh_flag(pager, child, c);
        if (node.bitmap().test(j) != c.critical()) {
          node.bitmap().set(j, c.critical());
          pager.mark_header(path[i]);
        }
      }
    }
    refresh_flag(pager, path[i], node);
  }
}

// Slack (free space minus flagged children) of the half of `node` that will
// hold child `route` if keys()[mid] is promoted.
std::int64_t half_slack(const Node& node, std::size_t mid, std::size_t route) {
  const std::size_t n = node.size();
  const bool left = route <= mid;
  const std::size_t first = left ? 0 : mid + 1;
  const std::size_t last = left ? mid : n;
  const std::size_t keys = left ? mid : n - mid - 1;
  std::int64_t flagged = 0;
  for (std::size_t i = first; i <= last; ++i) flagged += node.bitmap().test(i) ? 1 : 0;
  return static_cast<std::int64_t>(node.capacity() - keys) - flagged;
}

// The default middle split leaves both halves with slack of at least two for
// every capacity above 3. At capacity 3 a two-key node can leave the routed
// half with slack one, so that the leaf filling up below would make the half
// critical and its parent unsafe; promoting the other key avoids it.
std::optional<std::size_t> choose_mid(Pager& pager, const Descent& descent, NodeId id) {
  const Node& node = pager.fetch(id);
  if (node.is_leaf()) return std::nullopt;
  const auto it = std::find(descent.path.begin(), descent.path.end(), id);
  const std::size_t route = node.slot_of(*(it + 1));
  const std::size_t mid = node.default_mid();
  if (half_slack(node, mid, route) >= 2 || mid + 1 >= node.size()) return std::nullopt;
  if (half_slack(node, mid + 1, route) > half_slack(node, mid, route)) return mid + 1;
  return std::nullopt;
}

}  // namespace

bool Footprint::contains(NodeId id) const { return std::find(nodes.begin(), nodes.end(), id) != nodes.end(); }

Footprint footprint(Pager& pager, const Plan& plan, Key key) {
  Footprint fp;
  const auto& path = plan.descent.path;
  const std::size_t leaf_index = path.size() - 1;
  fp.nodes.push_back(path[leaf_index]);
  std::optional<std::size_t> split_index;
  if (plan.ctx.last_critical) {
    const auto it = std::find(path.begin(), path.end(), *plan.ctx.last_critical);
    if (it == path.end()) throw InvariantViolation("bottommost critical node is not on the descent path");
    split_index = static_cast<std::size_t>(it - path.begin());
    if (*split_index != leaf_index) fp.nodes.push_back(path[*split_index]);
    if (*split_index > 0) {
      fp.nodes.push_back(path[*split_index - 1]);
    } else {
      fp.root_change = true;
    }
  }
  // A leaf that fills up turns critical; the news climbs while each
  // ancestor on the way is left with exactly zero slack.
  const Node& leaf = pager.fetch(path[leaf_index]);
  const bool fills = split_index != leaf_index && leaf.free_space() == 1 && !holds_key(leaf, key);
  if (fills) {
    for (std::size_t i = leaf_index; i-- > 0;) {
      if (!fp.contains(path[i])) fp.nodes.push_back(path[i]);
      if (split_index && i == *split_index) break;
      const Node& node = pager.fetch(path[i]);
      if (node.free_space() != node.bitmap().count() + 1) break;
    }
  }
  return fp;
}

SplitResult proactive_split(Tree& tree, Pager& pager, const Descent& descent, NodeId node) {
  const NodeId parent = parent_on_path(descent, node);
  require_parent_slot(pager, node, parent);
  return tree.split_child(pager, parent, node, choose_mid(pager, descent, node));
}

void settle(Tree& tree, Pager& pager, Key key) { settle_from(pager, tree.root(), key); }

namespace {

// Bottom-up metadata pass over the path the key now follows, restricted to
// the nodes the insert owns (footprint plus fresh allocations). Everything
// else is left unread. A node whose flag changes must have its parent owned
// too, otherwise the prediction was wrong.
void settle_path(Pager& pager, const std::vector<NodeId>& path, const std::vector<NodeId>& owned) {
  auto is_owned = [&](NodeId id) { return std::find(owned.begin(), owned.end(), id) != owned.end(); };
  for (std::size_t i = path.size(); i-- > 0;) {
    if (!is_owned(path[i])) continue;
    Node& node = pager.fetch(path[i]);
    if (!node.is_leaf()) {
      const auto children = node.children();
      for (std::size_t j = 0; j < children.size(); ++j) {
        const NodeId child = children[j];
        if (!is_owned(child)) continue;
        Node& c = pager.fetch(child);
        if (i + 1 == path.size() || child != path[i + 1]) refresh_flag(pager, child, c);
        if (node.bitmap().test(j) != c.critical()) {
          node.bitmap().set(j, c.critical());
          pager.mark_header(path[i]);
        }
      }
    }
    const bool before = node.critical();
    refresh_flag(pager, path[i], node);
    if (node.critical() != before && i > 0 && !is_owned(path[i - 1])) {
      std::ostringstream msg;
      msg << "flag change of " << path[i] << " escaped the predicted footprint";
      throw InvariantViolation(msg.str());
    }
  }
}

}  // namespace

ApplyResult apply(Tree& tree, Pager& pager, const Plan& plan, Key key, Value value) {
  ApplyResult result;
  const Descent& d = plan.descent;
  const Footprint fp = footprint(pager, plan, key);
  std::vector<NodeId> path = d.path;

  bool placed = false;
  if (plan.ctx.last_critical) {
    const NodeId node = *plan.ctx.last_critical;
    const NodeId parent = parent_on_path(d, node);
    require_parent_slot(pager, node, parent);
    SplitResult s;
    if (node == d.leaf()) {
      s = tree.split_leaf_inserting(pager, parent, node, key, value);
      placed = true;
    } else {
      s = tree.split_child(pager, parent, node, choose_mid(pager, d, node));
    }
    result.splits = 1;
    *std::find(path.begin(), path.end(), node) = key >= s.separator ? s.right : s.left;
    if (!parent.valid()) path.insert(path.begin(), tree.root());
  }

  if (!placed) {
    const Node& leaf = pager.fetch(d.leaf());
    if (leaf.full() && !holds_key(leaf, key)) {
      std::ostringstream msg;
      msg << "leaf " << d.leaf() << " is full but was not split";
      throw InvariantViolation(msg.str());
    }
    tree.put_in_leaf(pager, d.leaf(), key, value);
  }

  std::vector<NodeId> owned = fp.nodes;
  owned.insert(owned.end(), pager.buffer().allocated.begin(), pager.buffer().allocated.end());
  settle_path(pager, path, owned);
  return result;
}

InsertReport insert(Tree& tree, Pager& pager, Key key, Value value) {
  pager.begin_op();
  Plan plan;
  plan.descent = tree.descend(pager, key);
  plan.ctx = analyze_path(pager, plan.descent);
  const ApplyResult applied = apply(tree, pager, plan, key, value);
  return Tree::make_report(pager.end_op(), applied.splits, plan.descent.height());
}

namespace {

NodeClass classify_rec(const Tree& tree, NodeId id, std::unordered_map<NodeId, NodeClass>* memo) {
  const Node& node = tree.peek(id);
  NodeClass c;
  if (node.is_leaf()) {
    c = node.full() ? NodeClass::kCritical : NodeClass::kSafeNonCritical;
  } else {
    std::size_t s = 0;
    for (const NodeId child : node.children()) {
      if (classify_rec(tree, child, memo) != NodeClass::kSafeNonCritical) ++s;
    }
    const std::size_t f = node.free_space();
    c = f < s ? NodeClass::kUnsafe : (f == s ? NodeClass::kCritical : NodeClass::kSafeNonCritical);
  }
  if (memo != nullptr) memo->emplace(id, c);
  return c;
}

}  // namespace

NodeClass classify_node(const Tree& tree, NodeId id) { return classify_rec(tree, id, nullptr); }

std::unordered_map<NodeId, NodeClass> classify_all(const Tree& tree) {
  std::unordered_map<NodeId, NodeClass> memo;
  memo.reserve(tree.store().size());
  classify_rec(tree, tree.root(), &memo);
  return memo;
}

UnsafeReport verify_no_unsafe(const Tree& tree) {
  UnsafeReport report;
  for (const auto& [id, c] : classify_all(tree)) {
    if (c == NodeClass::kUnsafe && !tree.peek(id).is_leaf()) report.offending.push_back(id);
  }
  std::sort(report.offending.begin(), report.offending.end());
  report.ok = report.offending.empty();
  return report;
}

FlagReport verify_flag_consistency(const Tree& tree) {
  FlagReport report;
  const auto classes = classify_all(tree);
  auto violation = [&](NodeId id, const std::string& what) {
    std::ostringstream os;
    os << id << ": " << what;
    report.violations.push_back(os.str());
  };
  for (const auto& [id, c] : classes) {
    const Node& node = tree.peek(id);
    if (node.critical()) {
      ++report.flagged;
      if (c == NodeClass::kSafeNonCritical) violation(id, "flagged critical but the oracle classifies it safe");
      if (node.is_leaf() && node.free_space() > 1) violation(id, "flagged leaf has more than one free slot");
      if (!node.is_leaf() && node.free_space() > node.bitmap().count()) {
        violation(id, "flagged internal node has more free slots than flagged children");
      }
    } else if (c != NodeClass::kSafeNonCritical) {
      ++report.lagging;
    }
    if (node.is_leaf()) continue;
    const auto children = node.children();
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (node.bitmap().test(i) != tree.peek(children[i]).critical()) {
        violation(id, "bitmap bit " + std::to_string(i) + " disagrees with the child's flag");
      }
    }
  }
  std::sort(report.violations.begin(), report.violations.end());
  report.ok = report.violations.empty();
  return report;
}

}  // namespace ffbt::ff
