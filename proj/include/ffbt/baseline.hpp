#pragma once

#include "ffbt/pager.hpp"
#include "ffbt/tree.hpp"
#include "ffbt/types.hpp"

/// Classic B+-tree insertion: the leaf splits on overflow and the separator
/// insert cascades upward, splitting every full ancestor and possibly
/// installing a new root.
namespace ffbt::baseline {

InsertReport insert(Tree& tree, Pager& pager, Key key, Value value);

inline InsertReport insert(Tree& tree, Key key, Value value) { return insert(tree, tree.pager(), key, value); }

}  // namespace ffbt::baseline
