#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ffbt/pager.hpp"
#include "ffbt/tree.hpp"
#include "ffbt/types.hpp"

/// Top-down preemptive splitting: every full node met on the way down,
/// including the root and the leaf, is split before the descent continues,
/// so the leaf insert never propagates upward.
namespace ffbt::clrs {

InsertReport insert(Tree& tree, Pager& pager, Key key, Value value);

inline InsertReport insert(Tree& tree, Key key, Value value) { return insert(tree, tree.pager(), key, value); }

/// Path positions of the full nodes on `descent`: the nodes an insert splits.
std::vector<std::size_t> full_on_path(Pager& pager, const Descent& descent);

/// Write half of an insert: walks a validated descent top-down, splitting the
/// nodes at `split_at` (ascending path positions) and re-homing the walk into
/// the half that covers `key`, then puts the entry into the leaf. Only the
/// split nodes, their parents and the leaf are read. Returns the number of
/// splits.
std::uint32_t apply(Tree& tree, Pager& pager, const Descent& descent, const std::vector<std::size_t>& split_at,
                    Key key, Value value);

}  // namespace ffbt::clrs
