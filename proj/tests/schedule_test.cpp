#include <gtest/gtest.h>

#include <random>

#include "torusbcast/feasibility.hpp"
#include "torusbcast/schedule.hpp"
#include "torusbcast/schedule_io.hpp"
#include "torusbcast/simulate.hpp"

namespace tb = torusbcast;
using tb::DirectionIndex;
using tb::NodeCoord;
using tb::RoutingTree;
using tb::TorusShape;

namespace {

RoutingTree build(const TorusShape& s, tb::RoutingRule rule = tb::RoutingRule::ShortestPath) {
  auto outcome = tb::build_balanced_tree(s, {rule, tb::kDefaultNodeBudget});
  if (auto* w = std::get_if<tb::InfeasibleWitness>(&outcome))
    throw std::runtime_error("unexpected witness: " + w->describe());
  return std::get<RoutingTree>(std::move(outcome));
}

// Arrivals along the first admissible direction of each offset; the 3x2
// variant forces every diagonal offset onto axis 1.
RoutingTree first_choice_tree(const TorusShape& s) {
  RoutingTree::Map arrival;
  for (std::uint64_t i = 0; i < s.node_count(); ++i) {
    const auto x = tb::node_at(i, s);
    if (!x.is_zero()) arrival.emplace(x, tb::admissible_directions(x, s).front());
  }
  return RoutingTree(s, std::move(arrival));
}

}  // namespace

TEST(AdmissibleDirections, Examples) {
  const TorusShape s5(5, 2);
  EXPECT_EQ(tb::admissible_directions(NodeCoord(s5, {1, 0}), s5), (std::vector<DirectionIndex>{{1, 1}}));
  EXPECT_EQ(tb::admissible_directions(NodeCoord(s5, {2, 1}), s5),
            (std::vector<DirectionIndex>{{1, 1}, {2, 1}}));
  const TorusShape s4(4, 2);
  EXPECT_EQ(tb::admissible_directions(NodeCoord(s4, {2, 0}), s4),
            (std::vector<DirectionIndex>{{1, 1}, {1, -1}}));
  EXPECT_THROW(tb::admissible_directions(NodeCoord::reference(s4), s4), tb::DomainError);
}

TEST(AdmissibleDirections, NearestAxisRule) {
  const TorusShape s(7, 3);
  EXPECT_EQ(tb::admissible_directions(NodeCoord(s, {3, -1, 0}), s, tb::RoutingRule::NearestAxis),
            (std::vector<DirectionIndex>{{2, -1}}));
  EXPECT_EQ(tb::admissible_directions(NodeCoord(s, {2, -2, 3}), s, tb::RoutingRule::NearestAxis),
            (std::vector<DirectionIndex>{{1, 1}, {2, -1}}));
}

TEST(AdmissibleDirections, EveryChoiceShortensDistance) {
  for (auto [k, n] : std::vector<std::pair<int, int>>{{3, 3}, {4, 3}, {5, 2}, {6, 2}, {7, 2}}) {
    const TorusShape s(k, n);
    for (std::uint64_t i = 1; i < s.node_count(); ++i) {
      const auto x = tb::node_at(i, s);
      if (x.is_zero()) continue;
      int count = 0;
      for (const auto& d : tb::all_directions(s)) {
        const bool shortens = tb::norm(tb::parent_offset(x, d, s), s) == tb::norm(x, s) - 1;
        const auto adm = tb::admissible_directions(x, s);
        ASSERT_EQ(shortens, std::find(adm.begin(), adm.end(), d) != adm.end()) << s << x;
        count += shortens ? 1 : 0;
      }
      ASSERT_GE(count, 1);
    }
  }
}

TEST(BuildBalancedTree, Examples) {
  EXPECT_EQ(tb::link_loads(build(TorusShape(3, 2))).uniform_loads(), (std::vector<std::uint64_t>{1, 1}));
  EXPECT_EQ(tb::link_loads(build(TorusShape(5, 2))).uniform_loads(),
            (std::vector<std::uint64_t>{1, 2, 2, 1}));

  auto outcome = tb::build_balanced_tree(TorusShape(4, 2));
  ASSERT_TRUE(std::holds_alternative<tb::InfeasibleWitness>(outcome));
  const auto& w = std::get<tb::InfeasibleWitness>(outcome);
  EXPECT_EQ(w.kind, tb::InfeasibleWitness::Kind::SphereNotDivisible);
  EXPECT_EQ(w.step, 2);
  EXPECT_EQ(w.sphere_size, 6u);
  EXPECT_EQ(w.directions, 4);

  auto o33 = tb::build_balanced_tree(TorusShape(3, 3));
  ASSERT_TRUE(std::holds_alternative<tb::InfeasibleWitness>(o33));
  EXPECT_EQ(std::get<tb::InfeasibleWitness>(o33).step, 3);
}

TEST(BuildBalancedTree, BudgetExceeded) {
  EXPECT_THROW(tb::build_balanced_tree(TorusShape(5, 4), {tb::RoutingRule::ShortestPath, 100}),
               tb::BudgetExceeded);
}

TEST(BuildBalancedTree, FeasibleShapesVerify) {
  for (auto [k, n] : std::vector<std::pair<int, int>>{{3, 1}, {5, 1}, {7, 1}, {9, 1}, {3, 2}, {5, 2},
                                                      {7, 2}, {9, 2}, {3, 4}, {5, 4}}) {
    const TorusShape s(k, n);
    const auto tree = build(s);
    EXPECT_TRUE(tb::link_loads(tree).balanced()) << s;
    const auto report = tb::verify_schedule(tree);
    EXPECT_TRUE(report.ok()) << s;
    EXPECT_EQ(report.steps, tb::diameter(s));
    EXPECT_EQ(report.violation_count, 0u);
  }
}

TEST(BuildBalancedTree, NearestAxisRuleOnSmallShapes) {
  for (auto [k, n] : std::vector<std::pair<int, int>>{{3, 2}, {5, 2}, {7, 2}, {3, 4}}) {
    const TorusShape s(k, n);
    auto outcome = tb::build_balanced_tree(s, {tb::RoutingRule::NearestAxis, tb::kDefaultNodeBudget});
    if (const auto* tree = std::get_if<RoutingTree>(&outcome)) {
      EXPECT_TRUE(tb::verify_schedule(*tree).ok()) << s;
      for (const auto& [offset, dir] : tree->arrivals()) {
        const auto adm = tb::admissible_directions(offset, s, tb::RoutingRule::NearestAxis);
        ASSERT_NE(std::find(adm.begin(), adm.end(), dir), adm.end());
      }
    }
  }
  EXPECT_TRUE(std::holds_alternative<RoutingTree>(
      tb::build_balanced_tree(TorusShape(5, 2), {tb::RoutingRule::NearestAxis, 1000})));
}

TEST(BuildBalancedTree, InfeasibleGridShapesGiveWitness) {
  for (int k = 3; k <= 9; ++k) {
    for (int n = 1; n <= 8; ++n) {
      const TorusShape s(k, n);
      if (s.node_count() > 10'000 || tb::theorem_predicate(s)) continue;
      EXPECT_TRUE(std::holds_alternative<tb::InfeasibleWitness>(tb::build_balanced_tree(s))) << s;
    }
  }
}

TEST(BuildBalancedTree, Deterministic) {
  const TorusShape s(5, 4);
  EXPECT_EQ(tb::write_schedule_json(build(s)), tb::write_schedule_json(build(s)));
}

TEST(RoutingTree, RejectsInvariantViolations) {
  const TorusShape s(5, 2);
  auto arrivals = build(s).arrivals();
  {
    auto bad = arrivals;
    bad[NodeCoord(s, {2, 0})] = DirectionIndex{2, 1};
    EXPECT_THROW(RoutingTree(s, bad), tb::TreeInvariantError);
  }
  {
    auto bad = arrivals;
    bad.erase(NodeCoord(s, {1, 1}));
    EXPECT_THROW(RoutingTree(s, bad), tb::TreeInvariantError);
  }
  {
    auto bad = arrivals;
    bad[NodeCoord::reference(s)] = DirectionIndex{1, 1};
    EXPECT_THROW(RoutingTree(s, bad), tb::TreeInvariantError);
  }
  {
    auto bad = arrivals;
    bad[NodeCoord(s, {1, 1})] = DirectionIndex{3, 1};
    EXPECT_THROW(RoutingTree(s, bad), tb::TreeInvariantError);
  }
}

TEST(VerifySchedule, DetectsUnbalancedTree) {
  const TorusShape s(3, 2);
  const auto tree = first_choice_tree(s);
  for (const auto& [offset, dir] : tree.arrivals()) {
    if (tb::norm(offset, s) == 2) {
      ASSERT_EQ(dir.axis, 1);
    }
  }

  const auto profile = tb::link_loads(tree);
  EXPECT_FALSE(profile.balanced());
  EXPECT_EQ(profile.per_step[1], (std::vector<std::uint64_t>{2, 2, 0, 0}));

  const auto report = tb::verify_schedule(tree);
  EXPECT_TRUE(report.nodup_ok);
  EXPECT_TRUE(report.shortest_ok);
  EXPECT_FALSE(report.balance_ok);
  EXPECT_EQ(report.steps, 2);
  ASSERT_FALSE(report.violations.empty());
  EXPECT_NE(report.violations.front().detail.find("step 2"), std::string::npos);
}

TEST(Simulate, InventoriesAndTranscript) {
  const TorusShape s(5, 2);
  const auto tree = build(s);
  tb::TranscriptRecorder rec(s);
  tb::simulate(tree, rec);
  const std::uint64_t nodes = s.node_count();
  EXPECT_EQ(rec.transcript.size(), nodes * (nodes - 1));
  ASSERT_EQ(rec.held_after_step.size(), 4u);
  EXPECT_EQ(rec.held_after_step.front(), nodes * (1 + 2 * 2));
  EXPECT_EQ(rec.held_after_step.back(), nodes * nodes);
  for (auto inv : rec.inventories) {
    std::sort(inv.begin(), inv.end());
    ASSERT_EQ(inv.size(), nodes);
    for (std::uint64_t i = 0; i < nodes; ++i) ASSERT_EQ(inv[i], i);
  }
  for (std::size_t i = 1; i < rec.transcript.size(); ++i)
    ASSERT_LE(rec.transcript[i - 1].step, rec.transcript[i].step);
}

TEST(Simulate, PhysicalLoadsMatchProfile) {
  std::mt19937_64 rng(5);
  for (auto [k, n] : std::vector<std::pair<int, int>>{{5, 2}, {3, 4}}) {
    const TorusShape s(k, n);
    const auto tree = build(s);
    const auto profile = tb::link_loads(tree);
    tb::TranscriptRecorder rec(s);
    tb::simulate(tree, rec);
    for (int trial = 0; trial < 10; ++trial) {
      const std::uint64_t node = rng() % s.node_count();
      const auto dir = DirectionIndex::from_index(static_cast<int>(rng() % (2 * static_cast<unsigned>(n))));
      const int step = 1 + static_cast<int>(rng() % static_cast<unsigned>(tb::diameter(s)));
      const auto load = std::count_if(rec.transcript.begin(), rec.transcript.end(), [&](const tb::Transfer& tr) {
        return tr.step == step && tr.from == node && tr.direction == dir;
      });
      EXPECT_EQ(static_cast<std::uint64_t>(load),
                profile.per_step[static_cast<std::size_t>(step - 1)][static_cast<std::size_t>(dir.index())])
          << s << " node " << node << " step " << step;
    }
  }
}

TEST(Simulate, BudgetExceeded) {
  const auto tree = build(TorusShape(5, 2));
  EXPECT_THROW(tb::verify_schedule(tree, 10), tb::BudgetExceeded);
}
