#include "ffbt/clrs.hpp"

#include <algorithm>

namespace ffbt::clrs {

std::vector<std::size_t> full_on_path(Pager& pager, const Descent& descent) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < descent.path.size(); ++i) {
    if (pager.fetch(descent.path[i]).full()) out.push_back(i);
  }
  return out;
}

std::uint32_t apply(Tree& tree, Pager& pager, const Descent& descent, const std::vector<std::size_t>& split_at,
                    Key key, Value value) {
  std::uint32_t splits = 0;
  NodeId parent;  // invalid: the walk is at the root
  NodeId target = descent.leaf();
  for (std::size_t i = 0; i < descent.path.size(); ++i) {
    NodeId holder = descent.path[i];
    if (std::binary_search(split_at.begin(), split_at.end(), i)) {
      const SplitResult s = tree.split_child(pager, parent, holder);
      ++splits;
      holder = key >= s.separator ? s.right : s.left;
    }
    if (i + 1 == descent.path.size()) target = holder;
    parent = holder;
  }
  tree.put_in_leaf(pager, target, key, value);
  return splits;
}

InsertReport insert(Tree& tree, Pager& pager, Key key, Value value) {
  pager.begin_op();
  const Descent d = tree.descend(pager, key);
  const std::uint32_t splits = apply(tree, pager, d, full_on_path(pager, d), key, value);
  return Tree::make_report(pager.end_op(), splits, d.height());
}

}  // namespace ffbt::clrs
