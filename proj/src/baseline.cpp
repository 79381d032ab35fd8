#include "ffbt/baseline.hpp"

namespace ffbt::baseline {

InsertReport insert(Tree& tree, Pager& pager, Key key, Value value) {
  pager.begin_op();
  const Descent d = tree.descend(pager, key);
  const std::uint32_t height = d.height();
  std::uint32_t splits = 0;

  Node& leaf = pager.fetch(d.leaf());
  const std::size_t pos = leaf.lower_bound(key);
  const bool exists = pos < leaf.size() && leaf.key(pos) == key;
  if (exists || !leaf.full()) {
    tree.put_in_leaf(pager, d.leaf(), key, value);
    return Tree::make_report(pager.end_op(), splits, height);
  }

  // Overflow: split the capacity+1 state, then carry the separator upward.
  NodeId carried = pager.allocate(NodeKind::kLeaf);
  Key separator = leaf.split_leaf_with(pos, key, value, pager.fetch(carried));
  pager.mark_dirty(d.leaf());
  tree.note_new_key();
  ++splits;

  for (std::size_t level = d.path.size() - 1; level-- > 0;) {
    const NodeId parent_id = d.path[level];
    Node& parent = pager.fetch(parent_id);
    const std::size_t slot = parent.slot_of(d.path[level + 1]);
    pager.mark_dirty(parent_id);
    if (!parent.full()) {
      parent.insert_separator(slot, separator, carried);
      return Tree::make_report(pager.end_op(), splits, height);
    }
    const NodeId right = pager.allocate(NodeKind::kInternal);
    separator = parent.split_internal_with(slot, separator, carried, pager.fetch(right));
    carried = right;
    ++splits;
  }

  tree.grow_root(pager, d.path.front(), separator, carried);
  return Tree::make_report(pager.end_op(), splits, height);
}

}  // namespace ffbt::baseline
