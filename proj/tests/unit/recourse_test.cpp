#include "fairrec/recourse.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "../support/exhaustive_oracle.hpp"
#include "fairrec/error.hpp"
#include "fairrec/rng.hpp"
#include "fairrec/worlds.hpp"

namespace fairrec {
namespace {

ClassifierModel FixedLinear(const Scm& scm, SelectorMode mode, std::vector<double> w, double b) {
  ModelSpec spec;
  spec.family = Family::kFixedLinear;
  spec.selector = mode;
  spec.fixed_weights = std::move(w);
  spec.fixed_bias = b;
  return Train(spec, scm, {}, 0);
}

ActionSpace Space(std::vector<std::size_t> actionable, std::vector<double> lo, std::vector<double> hi,
                  int bins = 15) {
  ActionSpace s;
  s.actionable = std::move(actionable);
  s.train_min = std::move(lo);
  s.train_max = std::move(hi);
  s.bins = bins;
  return s;
}

TEST(ActionGrid, CountsOneVariable) {
  const ActionGrid g = BuildGrid(Space({1}, {-1}, {1}), std::vector<double>{0, 0});
  EXPECT_EQ(g.ActionCount(std::nullopt), 16u);
  std::size_t n = 0;
  EnumerateActions(g, std::nullopt, [&](const Intervention&) { return ++n, true; });
  EXPECT_EQ(n, 16u);
}

TEST(ActionGrid, CountsThreeVariables) {
  const ActionGrid g = BuildGrid(Space({1, 2, 3}, {-1, -1, -1}, {1, 1, 1}), std::vector<double>{0, 0, 0, 0});
  EXPECT_EQ(g.ActionCount(std::nullopt), 4096u);
  std::size_t n = 0;
  EnumerateActions(g, std::nullopt, [&](const Intervention&) { return ++n, true; });
  EXPECT_EQ(n, 4096u);
  EXPECT_EQ(g.ActionCount(1), 46u);
  n = 0;
  EnumerateActions(g, 2, [&](const Intervention&) { return ++n, true; });
  EXPECT_EQ(n, 1u + 45u + 675u);
}

TEST(ActionGrid, RangeFromTrainingExtremes) {
  const ActionGrid g = BuildGrid(Space({0}, {-1}, {1}), std::vector<double>{0});
  ASSERT_EQ(g.values[0].size(), 15u);
  EXPECT_DOUBLE_EQ(g.values[0].front(), -2.0);
  EXPECT_DOUBLE_EQ(g.values[0].back(), 2.0);
  EXPECT_NEAR(g.values[0][1] - g.values[0][0], 4.0 / 14.0, 1e-15);
  EXPECT_FALSE(g.widened);
}

TEST(ActionGrid, WidensZeroWidthSide) {
  const ActionGrid g = BuildGrid(Space({0}, {0}, {1}), std::vector<double>{0});
  EXPECT_TRUE(g.widened);
  EXPECT_NEAR(g.values[0].front(), -2.0 / 14.0, 1e-15);
  EXPECT_DOUBLE_EQ(g.values[0].back(), 2.0);
  const ActionGrid both = BuildGrid(Space({0}, {3}, {3}), std::vector<double>{3});
  EXPECT_DOUBLE_EQ(both.values[0].front(), 2.0);
  EXPECT_DOUBLE_EQ(both.values[0].back(), 4.0);
}

TEST(ActionGrid, EnumerationOrder) {
  const ActionGrid g = BuildGrid(Space({1, 2}, {-1, -1}, {1, 1}, 2), std::vector<double>{0, 0, 0});
  std::vector<Intervention> seen;
  EnumerateActions(g, std::nullopt, [&](const Intervention& a) { return seen.push_back(a), true; });
  ASSERT_EQ(seen.size(), 9u);
  EXPECT_TRUE(seen[0].empty());
  using A = std::vector<std::pair<std::size_t, double>>;
  EXPECT_EQ(seen[1].assignments, (A{{1, -2}}));
  EXPECT_EQ(seen[2].assignments, (A{{1, 2}}));
  EXPECT_EQ(seen[3].assignments, (A{{2, -2}}));
  EXPECT_EQ(seen[5].assignments, (A{{1, -2}, {2, -2}}));
  EXPECT_EQ(seen[6].assignments, (A{{1, -2}, {2, 2}}));
  EXPECT_EQ(seen[8].assignments, (A{{1, 2}, {2, 2}}));
}

TEST(ActionGrid, EnumerationStops) {
  const ActionGrid g = BuildGrid(Space({1}, {-1}, {1}), std::vector<double>{0, 0});
  std::size_t n = 0;
  EnumerateActions(g, std::nullopt, [&](const Intervention&) { return ++n < 3; });
  EXPECT_EQ(n, 3u);
}

TEST(ActionSpace, RejectsProtectedAndSmallGrids) {
  const Scm scm = BuildWorld(World::kCauLin);
  const auto train = SampleInstances(scm, 20, 1);
  EXPECT_THROW(ActionSpace::FromTraining(scm, train, {0, 1}), Error);
  EXPECT_THROW(ActionSpace::FromTraining(scm, train, {1}, 1), Error);
  EXPECT_THROW(ActionSpace::FromTraining(scm, train, {9}), Error);
  const ActionSpace s = ActionSpace::FromTraining(scm, train, {3, 1, 1});
  EXPECT_EQ(s.actionable, (std::vector<std::size_t>{1, 3}));
  for (const auto& v : train) {
    EXPECT_LE(s.train_min[0], v.values[1]);
    EXPECT_GE(s.train_max[1], v.values[3]);
  }
}

TEST(CausalRecourse, VarianceExampleSmallestPositiveGridValue) {
  const Scm scm = BuildWorld(World::kVarianceExample);
  const ClassifierModel h = FixedLinear(scm, SelectorMode::kXOnly, {1.0}, 0.0);
  const ActionSpace space = Space({1}, {-2.0}, {2.0});
  const Instance v{{1.0, -0.8}, std::nullopt, std::nullopt};
  const RecourseResult r = SolveCausalRecourse(v, h, scm, space);
  ASSERT_TRUE(r.found);
  const ActionGrid g = BuildGrid(space, v.values);
  double theta = 0;
  for (double x : g.values[0]) {
    if (x > 0) {
      theta = x;
      break;
    }
  }
  ASSERT_GT(theta, 0.0);
  EXPECT_EQ(r.action.assignments.size(), 1u);
  EXPECT_EQ(r.action.assignments[0].second, theta);
  EXPECT_NEAR(r.cost, theta + 0.8, 1e-12);
  EXPECT_LE(r.evaluations, 16u);
}

TEST(CausalRecourse, CauLinPropagatesDownstream) {
  const Scm scm = BuildWorld(World::kCauLin);
  const ClassifierModel h = FixedLinear(scm, SelectorMode::kXOnly, {1.0, 0.0, 0.0}, -0.5);
  Instance v;
  for (const auto& s : SampleInstances(scm, 40, 3)) {
    if (s.values[1] < 0.0) {
      v = s;
      break;
    }
  }
  ASSERT_FALSE(v.values.empty());
  const Instance& neg = v;
  const ActionSpace space = Space({1}, {-3}, {3});
  const RecourseResult r = SolveCausalRecourse(neg, h, scm, space);
  ASSERT_TRUE(r.found);
  ASSERT_EQ(r.action.assignments.size(), 1u);
  const double dx1 = r.action.assignments[0].second - v.values[1];
  EXPECT_NEAR(r.achieved[3] - v.values[3], 0.5 * dx1, 1e-12);
  EXPECT_EQ(r.achieved[2], v.values[2]);
  EXPECT_EQ(r.achieved[0], v.values[0]);

  const RecourseResult imf = SolveImfRecourse(neg, h, space);
  ASSERT_TRUE(imf.found);
  EXPECT_EQ(imf.achieved[3], v.values[3]);
}

TEST(CausalRecourse, AlreadyPositiveIsFree) {
  const Scm scm = BuildWorld(World::kVarianceExample);
  const ClassifierModel h = FixedLinear(scm, SelectorMode::kXOnly, {1.0}, 0.0);
  const Instance v{{0.0, 0.3}, std::nullopt, std::nullopt};
  const RecourseResult r = SolveCausalRecourse(v, h, scm, Space({1}, {-1}, {1}));
  EXPECT_TRUE(r.found);
  EXPECT_TRUE(r.action.empty());
  EXPECT_EQ(r.cost, 0.0);
  EXPECT_EQ(r.evaluations, 1u);
  EXPECT_TRUE(ValidateAction(r, v, h, scm));
}

TEST(CausalRecourse, InfeasibleReportsInfiniteCost) {
  const Scm scm = BuildWorld(World::kVarianceExample);
  const ClassifierModel h = FixedLinear(scm, SelectorMode::kXOnly, {1.0}, -100.0);
  const Instance v{{0.0, 0.3}, std::nullopt, std::nullopt};
  const RecourseResult r = SolveCausalRecourse(v, h, scm, Space({1}, {-1}, {1}));
  EXPECT_FALSE(r.found);
  EXPECT_TRUE(std::isinf(r.cost));
  EXPECT_TRUE(r.achieved.empty());
  EXPECT_FALSE(ValidateAction(r, v, h, scm));
}

TEST(ImfRecourse, DistanceIsNearestGridValueAcrossBoundary) {
  const Scm scm = BuildWorld(World::kImf);
  const ClassifierModel h = FixedLinear(scm, SelectorMode::kXOnly, {1.0, 0.0, 0.0}, 0.0);
  const Instance v{{1.0, -0.3, 0.2, 0.1}, std::nullopt, std::nullopt};
  const ActionSpace space = Space({1, 2, 3}, {-2, -2, -2}, {2, 2, 2});
  const RecourseResult r = SolveImfRecourse(v, h, space);
  ASSERT_TRUE(r.found);
  const ActionGrid g = BuildGrid(space, v.values);
  double best = INFINITY;
  for (double x : g.values[0])
    if (x > 0) best = std::min(best, x + 0.3);
  EXPECT_NEAR(r.cost, best, 1e-12);
  EXPECT_GE(r.cost, 0.3);
  EXPECT_EQ(r.action.assignments.size(), 1u);
  EXPECT_EQ(r.action.assignments[0].first, 1u);
}

TEST(RecourseError, AbductionFailurePropagates) {
  const Scm scm = ApplySubsidy(BuildWorld(World::kVarianceExample), {1.0, -0.5, 1.0});
  const ClassifierModel h = FixedLinear(scm, SelectorMode::kXOnly, {1.0}, 0.0);
  const Instance v{{0.0, 1.0, -0.8}, std::nullopt, std::nullopt};
  EXPECT_THROW(SolveCausalRecourse(v, h, scm, Space({2}, {-1}, {1})), Error);
}

TEST(Validation, SearchUnderOracleIsAlwaysValid) {
  const Scm scm = BuildWorld(World::kCauAnm);
  const ClassifierModel h = FixedLinear(scm, SelectorMode::kXAndA, {0.3, 1.0, 0.5, 0.8}, -1.0);
  const auto data = SampleInstances(scm, 60, 5);
  const ActionSpace space = ActionSpace::FromTraining(scm, data, {1, 2, 3}, 7);
  int checked = 0;
  for (const auto& v : data) {
    const RecourseResult r = SolveCausalRecourse(v, h, scm, space);
    if (!r.found) continue;
    EXPECT_TRUE(ValidateAction(r, v, h, scm));
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(Validation, TwinExtraAssignment) {
  const Scm scm = BuildWorld(World::kCauLin);
  const ClassifierModel h = FixedLinear(scm, SelectorMode::kXOnly, {1.0, 0.0, 1.0}, -1.0);
  const Instance v = SampleInstances(scm, 1, 9)[0];
  const ExogenousVector u = Abduct(scm, v);
  const std::vector<std::pair<std::size_t, double>> flip{{0, -v.values[0]}};
  const Instance twin = CounterfactualTwin(scm, v, -v.values[0]);
  const Intervention none;
  EXPECT_EQ(ValidateActionWith(none, v.values, u, u, h, scm, flip),
            PredictFromValue(DecisionValue(h, twin.values, u)) == 1);
}

TEST(Format, Intervention) {
  const Scm scm = BuildWorld(World::kCauLin);
  EXPECT_EQ(FormatIntervention(scm, Intervention{}), "{}");
  EXPECT_EQ(FormatIntervention(scm, Intervention{{{1, 0.5}, {3, -2}}}), "x1=0.5;x3=-2");
}

TEST(CostKind, Names) {
  EXPECT_EQ(ParseCostKind(CostKindName(CostKind::kL2Endpoint)), CostKind::kL2Endpoint);
  EXPECT_EQ(ParseCostKind(CostKindName(CostKind::kL2Intervention)), CostKind::kL2Intervention);
  EXPECT_THROW(ParseCostKind("l1"), Error);
}

// ---------------------------------------------------------------------------
// Properties over random individuals and classifiers.

struct Case {
  World world;
  bool causal;
  CostKind cost;
};

std::string CaseName(const ::testing::TestParamInfo<Case>& info) {
  std::string s(WorldName(info.param.world));
  s += info.param.causal ? "_causal_" : "_imf_";
  s += info.param.cost == CostKind::kL2Endpoint ? "endpoint" : "intervention";
  for (char& c : s)
    if (c == '-') c = '_';
  return s;
}

class SolverProperty : public ::testing::TestWithParam<Case> {};

ClassifierModel RandomModel(const Scm& scm, CounterRng& rng) {
  std::vector<double> w;
  for (std::size_t k = 0; k < scm.feature_indices().size(); ++k) w.push_back(rng.Gaussian());
  return FixedLinear(scm, SelectorMode::kXOnly, w, rng.Gaussian());
}

TEST_P(SolverProperty, MatchesExhaustiveOracle) {
  const Case c = GetParam();
  const Scm scm = BuildWorld(c.world);
  const auto train = SampleInstances(scm, 200, 11);
  const auto people = SampleInstances(scm, 40, 12);
  CounterRng rng(77, StreamId("models"));
  const ActionSpace space = ActionSpace::FromTraining(scm, train, scm.feature_indices(), 7);
  int found = 0;
  for (std::size_t i = 0; i < people.size(); ++i) {
    const ClassifierModel h = RandomModel(scm, rng);
    const Instance& v = people[i];
    const RecourseResult r = c.causal ? SolveCausalRecourse(v, h, scm, space, c.cost)
                                      : SolveImfRecourse(v, h, space, c.cost);
    testing::OracleProblem p;
    p.factual = v.values;
    p.u = Abduct(scm, v);
    p.scm = c.causal ? &scm : nullptr;
    p.actionable = space.actionable;
    p.lo_data = space.train_min;
    p.hi_data = space.train_max;
    p.bins = 7;
    p.endpoint_cost = c.cost == CostKind::kL2Endpoint;
    p.decision = [&](std::span<const double> x) { return DecisionValue(h, x, {}); };
    const testing::OracleAnswer o = testing::SolveExhaustively(p);
    ASSERT_EQ(r.found, o.found) << "individual " << i;
    if (!o.found) continue;
    ++found;
    EXPECT_EQ(r.cost, o.cost) << "individual " << i;
    EXPECT_EQ(r.action.assignments, o.action) << "individual " << i;
    EXPECT_EQ(r.achieved, o.achieved) << "individual " << i;
  }
  EXPECT_GT(found, 20);
}

TEST_P(SolverProperty, CostIsSoundAndGridRefinementNeverHurts) {
  const Case c = GetParam();
  const Scm scm = BuildWorld(c.world);
  const auto train = SampleInstances(scm, 200, 21);
  const auto people = SampleInstances(scm, 25, 22);
  CounterRng rng(78, StreamId("models"));
  const ActionSpace coarse = ActionSpace::FromTraining(scm, train, scm.feature_indices(), 15);
  const ActionSpace fine = ActionSpace::FromTraining(scm, train, scm.feature_indices(), 29);
  for (const auto& v : people) {
    const ClassifierModel h = RandomModel(scm, rng);
    auto solve = [&](const ActionSpace& s) {
      return c.causal ? SolveCausalRecourse(v, h, scm, s, c.cost) : SolveImfRecourse(v, h, s, c.cost);
    };
    const RecourseResult a = solve(coarse);
    const RecourseResult b = solve(fine);
    if (a.found) {
      EXPECT_EQ(a.cost, ActionCost(c.cost, v.values, a.action, a.achieved));
      EXPECT_EQ(PredictFromValue(DecisionValue(h, a.achieved, {})), 1);
      ASSERT_TRUE(b.found);
      EXPECT_LE(b.cost, a.cost + 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    Worlds, SolverProperty,
    ::testing::Values(Case{World::kImf, true, CostKind::kL2Intervention},
                      Case{World::kImf, false, CostKind::kL2Endpoint},
                      Case{World::kCauLin, true, CostKind::kL2Intervention},
                      Case{World::kCauLin, true, CostKind::kL2Endpoint},
                      Case{World::kCauLin, false, CostKind::kL2Endpoint},
                      Case{World::kCauAnm, true, CostKind::kL2Intervention},
                      Case{World::kCauAnm, true, CostKind::kL2Endpoint},
                      Case{World::kCauAnm, false, CostKind::kL2Intervention}),
    CaseName);

TEST(SolverProperty, ImfWorldCollapse) {
  const Scm scm = BuildWorld(World::kImf);
  const auto train = SampleInstances(scm, 300, 31);
  const auto people = SampleInstances(scm, 200, 32);
  CounterRng rng(79, StreamId("models"));
  const ActionSpace space = ActionSpace::FromTraining(scm, train, scm.feature_indices());
  for (const auto& v : people) {
    const ClassifierModel h = RandomModel(scm, rng);
    for (CostKind k : {CostKind::kL2Intervention, CostKind::kL2Endpoint}) {
      const RecourseResult c = SolveCausalRecourse(v, h, scm, space, k);
      const RecourseResult i = SolveImfRecourse(v, h, space, k);
      ASSERT_EQ(c.found, i.found);
      if (c.found) EXPECT_EQ(c.cost, i.cost);
    }
  }
}

}  // namespace
}  // namespace fairrec
