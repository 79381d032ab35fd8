#include <gtest/gtest.h>

#include <random>
#include <unordered_map>

#include "ffbt/errors.hpp"
#include "ffbt/ffbtree.hpp"
#include "ffbt/tree.hpp"
#include "ffbt/workloads.hpp"
#include "fixtures.hpp"

using namespace ffbt;
using fixtures::inner;
using fixtures::leaf;
using fixtures::run;

namespace {

Node& fill_leaf(Tree& t, std::size_t cap, std::size_t n) {
  const NodeId id = fixtures::build(t, leaf(run(1, n)));
  (void)cap;
  return t.peek_mutable(id);
}

}  // namespace

TEST(ExamineNode, LeafWithOneFreeSlotSetsLastFlag) {
  Tree t(TreeConfig{4, Variant::kFf});
  Node& n = fill_leaf(t, 4, 3);
  ff::DescentContext ctx;
  ff::examine_node(n, t.root(), NodeId{}, ctx);
  ASSERT_TRUE(ctx.last_flag.has_value());
  EXPECT_EQ(ctx.last_flag->node, t.root());
  EXPECT_FALSE(ctx.last_flag->parent.valid());
  EXPECT_FALSE(ctx.last_critical.has_value());
}

TEST(ExamineNode, LeafWithTwoFreeSlotsLeavesContext) {
  Tree t(TreeConfig{4, Variant::kFf});
  Node& n = fill_leaf(t, 4, 2);
  ff::DescentContext ctx;
  ff::examine_node(n, t.root(), NodeId{}, ctx);
  EXPECT_FALSE(ctx.last_flag.has_value());
  EXPECT_FALSE(ctx.last_critical.has_value());
}

TEST(ExamineNode, InternalAtThresholdIsCritical) {
  Tree t(TreeConfig{4, Variant::kFf});
  const NodeId root = fixtures::build(t, inner({10, 20}, {leaf({1}), leaf({10}), leaf({20})}));
  Node& n = t.peek_mutable(root);
  n.bitmap().set(0);
  n.bitmap().set(2);  // F = 2, popcount = 2
  ff::DescentContext ctx;
  ff::examine_node(n, root, NodeId{}, ctx);
  ASSERT_TRUE(ctx.last_critical.has_value());
  EXPECT_EQ(*ctx.last_critical, root);
  ASSERT_TRUE(ctx.last_flag.has_value());
  EXPECT_EQ(ctx.last_flag->node, root);
}

TEST(ExamineNode, DeeperCallOverwrites) {
  Tree t(TreeConfig{4, Variant::kFf});
  const NodeId root = fixtures::build(t, inner({10}, {leaf({1, 2, 3}), leaf({10})}));
  const NodeId l0 = t.peek(root).child(0);
  ff::DescentContext ctx;
  ctx.last_flag = ff::FlagTarget{root, NodeId{}};
  ff::examine_node(t.peek(l0), l0, root, ctx);
  EXPECT_EQ(ctx.last_flag, (ff::FlagTarget{l0, root}));
}

TEST(FfInsert, NoCriticalNodeCostsHPlusOne) {
  Tree t(TreeConfig{4, Variant::kFf});
  fixtures::build(t, inner({10}, {leaf({1}), leaf({10})}));
  fixtures::settle_all(t);
  const InsertReport r = t.insert(2, 2);
  EXPECT_EQ(r.splits, 0u);
  EXPECT_EQ(r.total, 3u);
  EXPECT_EQ(r.header_writes, 0u);
}

TEST(FfInsert, FlaggedLeafIsTheOnlySplit) {
  Tree t(TreeConfig{4, Variant::kFf});
  const NodeId root = fixtures::build(t, inner({10}, {leaf({1, 2, 3}), leaf({10, 11})}));
  fixtures::settle_all(t);
  const NodeId l0 = t.peek(root).child(0);

  const InsertReport fill = t.insert(4, 4);  // leaf becomes full and is flagged
  EXPECT_EQ(fill.splits, 0u);
  EXPECT_EQ(fill.total, 3u);
  EXPECT_EQ(fill.header_writes, 1u);  // parent bitmap
  EXPECT_TRUE(t.peek(l0).critical());
  EXPECT_TRUE(t.peek(root).bitmap().test(0));

  const InsertReport r = t.insert(5, 5);
  EXPECT_EQ(r.splits, 1u);
  EXPECT_EQ(t.height(), 2u);
  EXPECT_EQ(t.peek(root).size(), 2u);
  EXPECT_FALSE(t.peek(l0).critical());
  // root and leaf read; leaf, sibling and root written
  EXPECT_EQ(r.total, 5u);
  EXPECT_EQ(r.fluctuation, 2);
  EXPECT_TRUE(check_structure(t).empty());
}

TEST(FfInsert, CriticalRootSplitsIntoNewRoot) {
  // Two full leaves under a root with two free slots: the root is critical.
  Tree t(TreeConfig{5, Variant::kFf});
  fixtures::build(t, inner({10, 20, 30}, {leaf(run(1, 5)), leaf(run(10, 5)), leaf({20}), leaf({30})}));
  fixtures::settle_all(t);
  ASSERT_TRUE(t.peek(t.root()).critical());
  const InsertReport r = t.insert(21, 21);
  EXPECT_EQ(r.splits, 1u);
  EXPECT_EQ(r.height, 2u);
  EXPECT_EQ(t.height(), 3u);
  EXPECT_EQ(t.peek(t.root()).size(), 1u);
  EXPECT_EQ(r.total, 6u);
  EXPECT_TRUE(ff::verify_no_unsafe(t).ok);
  EXPECT_TRUE(ff::verify_flag_consistency(t).ok);
}

TEST(ProactiveSplit, LeafUnderParentWithOneSlotFillsParentWithoutCascade) {
  Tree t(TreeConfig{3, Variant::kFf});
  const NodeId root = fixtures::build(t, inner({10, 20}, {leaf({1, 2, 3}), leaf({10}), leaf({20})}));
  fixtures::settle_all(t);
  const InsertReport r = t.insert(4, 4);
  EXPECT_EQ(r.splits, 1u);
  EXPECT_EQ(t.peek(root).free_space(), 0u);
  EXPECT_EQ(t.height(), 2u);
  EXPECT_TRUE(ff::verify_no_unsafe(t).ok);
}

TEST(ProactiveSplit, CriticalInternalWithNoSlackSplitsIntoRoomyHalves) {
  Tree t(TreeConfig{4, Variant::kFf});
  fixtures::build(t, inner({100}, {inner({10, 20, 30, 40}, {leaf({1}), leaf({10}), leaf({20}), leaf({30}), leaf({40})}),
                                   inner({150}, {leaf({100}), leaf({150})})}));
  fixtures::settle_all(t);
  const NodeId a = t.peek(t.root()).child(0);
  ASSERT_TRUE(t.peek(a).critical());
  const InsertReport r = t.insert(25, 25);
  EXPECT_EQ(r.splits, 1u);
  const Node& root = t.peek(t.root());
  ASSERT_EQ(root.size(), 2u);
  EXPECT_GE(t.peek(root.child(0)).free_space(), 2u);
  EXPECT_GE(t.peek(root.child(1)).free_space(), 2u);
  EXPECT_FALSE(t.peek(root.child(0)).critical());
  EXPECT_TRUE(check_structure(t).empty());
}

TEST(ProactiveSplit, RootSplitShape) {
  Tree t(TreeConfig{4, Variant::kFf});
  fixtures::build(t, inner({10, 20, 30, 40}, {leaf({1}), leaf({10}), leaf({20}), leaf({30}), leaf({40})}));
  Pager& p = t.pager();
  p.begin_op();
  const Descent d = t.descend(p, 25);
  ff::proactive_split(t, p, d, d.path.front());
  p.end_op();
  const Node& root = t.peek(t.root());
  EXPECT_EQ(root.size(), 1u);
  EXPECT_EQ(root.children().size(), 2u);
  EXPECT_EQ(t.height(), 3u);
}

TEST(ProactiveSplit, FullParentIsAnInvariantViolation) {
  // Inconsistent metadata: a flagged leaf under a full, unflagged parent.
  Tree t(TreeConfig{3, Variant::kFf});
  const NodeId root =
      fixtures::build(t, inner({10, 20, 30}, {leaf({1, 2, 3}), leaf({10}), leaf({20}), leaf({30})}));
  const NodeId l0 = t.peek(root).child(0);
  t.peek_mutable(l0).set_critical(true);
  Pager& p = t.pager();
  p.begin_op();
  const Descent d = t.descend(p, 4);
  EXPECT_THROW(ff::proactive_split(t, p, d, l0), InvariantViolation);
}

TEST(Classify, RootWithMoreFullLeavesThanSlotsIsUnsafe) {
  Tree t(TreeConfig{5, Variant::kFf});
  fixtures::build(t, inner({10, 20, 30}, {leaf(run(1, 5)), leaf(run(10, 5)), leaf(run(20, 5)), leaf({30})}));
  EXPECT_EQ(ff::classify_node(t, t.root()), ff::NodeClass::kUnsafe);
  const auto report = ff::verify_no_unsafe(t);
  EXPECT_FALSE(report.ok);
  EXPECT_EQ(report.offending, std::vector<NodeId>{t.root()});
}

TEST(Classify, RootWithAsManyFullLeavesAsSlotsIsCritical) {
  Tree t(TreeConfig{5, Variant::kFf});
  fixtures::build(t, inner({10, 20, 30}, {leaf(run(1, 5)), leaf(run(10, 5)), leaf({20}), leaf({30})}));
  EXPECT_EQ(ff::classify_node(t, t.root()), ff::NodeClass::kCritical);
}

TEST(Classify, SafeChildrenAndRoomIsSafe) {
  Tree t(TreeConfig{5, Variant::kFf});
  fixtures::build(t, inner({10}, {leaf({1, 2}), leaf({10})}));
  EXPECT_EQ(ff::classify_node(t, t.root()), ff::NodeClass::kSafeNonCritical);
  EXPECT_TRUE(ff::verify_no_unsafe(Tree(TreeConfig{5, Variant::kFf})).ok);
}

TEST(Settle, RestoresFlagsOnTheResidentPath) {
  Tree t(TreeConfig{4, Variant::kFf});
  const NodeId root = fixtures::build(t, inner({10}, {leaf({1, 2, 3, 4}), leaf({10})}));
  Pager& p = t.pager();
  p.begin_op();
  t.descend(p, 2);
  ff::settle(t, p, 2);
  const IoReport io = p.end_op();
  EXPECT_TRUE(t.peek(t.peek(root).child(0)).critical());
  EXPECT_TRUE(t.peek(root).bitmap().test(0));
  EXPECT_EQ(io.header_writes, 2u);
  EXPECT_TRUE(ff::verify_flag_consistency(t).ok);
}

TEST(FlagConsistency, SplitHalvesStartClear) {
  Tree t(TreeConfig{3, Variant::kFf});
  for (Key k = 1; k <= 4; ++k) t.insert(k, k);
  const Node& root = t.peek(t.root());
  ASSERT_FALSE(root.is_leaf());
  for (NodeId c : root.children()) EXPECT_FALSE(t.peek(c).critical());
}

TEST(FlagConsistency, LeafIsFlaggedTheMomentItFills) {
  Tree t(TreeConfig{4, Variant::kFf});
  for (Key k = 1; k <= 4; ++k) t.insert(k, k);
  EXPECT_TRUE(t.peek(t.root()).critical());
  const auto report = ff::verify_flag_consistency(t);
  EXPECT_TRUE(report.ok);
  EXPECT_EQ(report.lagging, 0u);
  EXPECT_EQ(report.flagged, 1u);
}

// --- properties over whole runs ---

namespace {

std::vector<Key> stream(int kind, std::size_t n, std::uint64_t seed) {
  using namespace workloads;
  switch (kind) {
    case 0:
      return gen_sequential(n, Direction::kAsc);
    case 1:
      return gen_sequential(n, Direction::kDesc);
    case 2:
      return gen_uniform(n, seed, std::uint64_t{1} << 40);
    default:
      return gen_zipfian(n, seed, 0.99, std::uint64_t{1} << 40);
  }
}

}  // namespace

class FfRuns : public ::testing::TestWithParam<std::tuple<std::size_t, int>> {};

TEST_P(FfRuns, OneSplitBoundedFluctuationExactMetadata) {
  const auto [cap, kind] = GetParam();
  Tree t(TreeConfig{cap, Variant::kFf});
  const auto keys = stream(kind, 20'000, 5);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const InsertReport r = t.insert(keys[i], keys[i]);
    ASSERT_LE(r.splits, 1u) << "insert " << i;
    ASSERT_LE(r.fluctuation, 3) << "insert " << i;
    if (r.splits == 0) ASSERT_EQ(r.total, r.height + 1u) << "insert " << i;
    if (i % 500 == 0) {
      ASSERT_TRUE(ff::verify_no_unsafe(t).ok) << "insert " << i;
      const auto flags = ff::verify_flag_consistency(t);
      ASSERT_TRUE(flags.ok) << flags.violations.front();
      ASSERT_EQ(flags.lagging, 0u);
    }
  }
  // Stored flags equal the oracle class everywhere.
  for (const auto& [id, c] : ff::classify_all(t)) {
    ASSERT_EQ(t.peek(id).critical(), c != ff::NodeClass::kSafeNonCritical) << id;
  }
  EXPECT_TRUE(check_structure(t).empty());
  EXPECT_EQ(scan_all(t).size(), keys.size());
}

INSTANTIATE_TEST_SUITE_P(CapacitiesAndWorkloads, FfRuns,
                         ::testing::Combine(::testing::Values(3, 4, 5, 8, 16), ::testing::Values(0, 1, 2, 3)));

TEST(FfProperties, WritesStayInsideTheFootprint) {
  for (std::size_t cap : {3, 4, 8}) {
    Tree t(TreeConfig{cap, Variant::kFf});
    Pager& p = t.pager();
    for (Key k : stream(2, 10'000, cap)) {
      p.begin_op();
      ff::Plan plan;
      plan.descent = t.descend(p, k);
      plan.ctx = ff::analyze_path(p, plan.descent);
      const ff::Footprint fp = ff::footprint(p, plan, k);
      ff::apply(t, p, plan, k, k);
      const OpBuffer& buf = p.buffer();
      auto owned = [&](NodeId id) {
        return fp.contains(id) || std::find(buf.allocated.begin(), buf.allocated.end(), id) != buf.allocated.end();
      };
      for (NodeId id : buf.dirty) ASSERT_TRUE(owned(id)) << "C=" << cap << " key " << k;
      for (NodeId id : buf.header) ASSERT_TRUE(owned(id)) << "C=" << cap << " key " << k;
      p.end_op();
    }
  }
}

TEST(FfProperties, NodeStateMachine) {
  // Critical nodes never turn unsafe, and only turn safe by splitting.
  for (std::size_t cap : {3, 4, 6}) {
    Tree t(TreeConfig{cap, Variant::kFf});
    auto before = ff::classify_all(t);
    std::unordered_map<NodeId, std::size_t> sizes;
    for (Key k : stream(2, 2'000, 40 + cap)) {
      for (const auto& [id, c] : before) sizes[id] = t.peek(id).size();
      t.insert(k, k);
      const auto after = ff::classify_all(t);
      for (const auto& [id, c] : after) {
        ASSERT_NE(c, ff::NodeClass::kUnsafe) << id;
        const auto it = before.find(id);
        if (it == before.end() || it->second != ff::NodeClass::kCritical) continue;
        if (c == ff::NodeClass::kSafeNonCritical) {
          ASSERT_LT(t.peek(id).size(), sizes[id]) << id << " left the critical state without splitting";
        }
      }
      before = after;
    }
  }
}
