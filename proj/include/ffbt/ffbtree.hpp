#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ffbt/pager.hpp"
#include "ffbt/tree.hpp"
#include "ffbt/types.hpp"

/// Fluctuation-free insertion. Nodes carry a critical flag and internal nodes
/// a bitmap of which children are flagged. A descent remembers the bottommost
/// flagged node; that node (and only that node) is split into its parent
/// before the entry goes into the leaf. Afterwards the flags and bitmaps of
/// the nodes the insert touched are brought up to date, bottom-up along the
/// new path, so the stored metadata always equals the classification oracle.
namespace ffbt::ff {

enum class NodeClass : std::uint8_t { kSafeNonCritical, kCritical, kUnsafe };

std::string_view to_string(NodeClass c) noexcept;

/// A node that becomes critical with this insert, and the parent whose
/// bitmap has to learn about it. The parent is invalid for the root.
struct FlagTarget {
  NodeId node;
  NodeId parent;

  friend bool operator==(const FlagTarget&, const FlagTarget&) = default;
};

struct DescentContext {
  std::optional<NodeId> last_critical;
  std::optional<FlagTarget> last_flag;
};

/// Threshold test for a node that is not flagged yet. A leaf with at most one
/// free slot will be full after this insert; an internal node whose free
/// space does not exceed its count of flagged children is critical. Later
/// (deeper) calls overwrite earlier ones.
void examine_node(const Node& node, NodeId id, NodeId parent, DescentContext& ctx);

/// Read half of an insert: the root-to-leaf path plus its descent context.
struct Plan {
  Descent descent;
  DescentContext ctx;
};

/// Builds the descent context for `descent` from the nodes' current state.
DescentContext analyze_path(Pager& pager, const Descent& descent);

/// Nodes an insert following `plan` may modify, predicted from the state the
/// plan was built on. Freshly allocated nodes are not listed; `root_change`
/// says whether a new root will be installed.
struct Footprint {
  std::vector<NodeId> nodes;
  bool root_change = false;

  bool contains(NodeId id) const;
};

Footprint footprint(Pager& pager, const Plan& plan, Key key);

struct ApplyResult {
  std::uint32_t splits = 0;
};

/// Write half: splits the bottommost critical node if there is one, puts the
/// entry into the right leaf, then settles the metadata.
ApplyResult apply(Tree& tree, Pager& pager, const Plan& plan, Key key, Value value);

/// Splits `node` (which must lie on `descent`) into its parent. Throws
/// InvariantViolation if the parent has no free slot.
SplitResult proactive_split(Tree& tree, Pager& pager, const Descent& descent, NodeId node);

/// Recomputes the critical flag of every resident node on `key`'s current
/// path and of the children those nodes hold in the buffer, bottom-up, and
/// mirrors the flags into the parents' bitmaps. Changes are charged as header
/// writes. Only nodes already in the buffer are touched.
void settle(Tree& tree, Pager& pager, Key key);

InsertReport insert(Tree& tree, Pager& pager, Key key, Value value);

inline InsertReport insert(Tree& tree, Key key, Value value) { return insert(tree, tree.pager(), key, value); }

// --- oracles over the tree state; stored flags are ignored ---

/// Recomputes the class of `id` from its subtree: a full leaf is critical;
/// an internal node with s critical-or-unsafe children is unsafe when its
/// free space is below s, critical when equal, else safe non-critical.
NodeClass classify_node(const Tree& tree, NodeId id);

std::unordered_map<NodeId, NodeClass> classify_all(const Tree& tree);

struct UnsafeReport {
  bool ok = true;
  std::vector<NodeId> offending;
};

/// True iff no internal node classifies as unsafe.
UnsafeReport verify_no_unsafe(const Tree& tree);

struct FlagReport {
  bool ok = true;
  std::size_t flagged = 0;
  // Nodes the oracle deems critical whose flag is not set.
  std::size_t lagging = 0;
  std::vector<std::string> violations;
};

/// Checks the stored metadata against the oracle: bitmap bits mirror the
/// children's flags, and every flagged node is critical (or worse) by the
/// oracle. Unflagged oracle-critical nodes are counted as lagging; ff keeps
/// that count at zero, but it is not reported as a violation.
FlagReport verify_flag_consistency(const Tree& tree);

}  // namespace ffbt::ff
