#include "fairrec/worlds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fairrec/error.hpp"

namespace fairrec {
namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments Of(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(xs.size() - 1);
  return m;
}

ExogenousVector Noise(const Scm& scm, std::vector<std::pair<std::string, double>> values) {
  ExogenousVector u(scm.num_exogenous(), 0.0);
  for (const auto& [name, v] : values) u[*scm.find_exogenous(name)] = v;
  return u;
}

TEST(BuildWorld, CauAnmX3Mechanism) {
  const Scm scm = BuildWorld(World::kCauAnm);
  const auto& eq = scm.equation(scm.index("x3"));
  // parents in declaration order: a, x1, x2
  const double pa[] = {1.0, 1.0, 0.0};
  EXPECT_NEAR(EvaluateMechanism(eq.mechanism, pa, 0.0), 0.6, 1e-12);
}

TEST(BuildWorld, NamesRoundTrip) {
  for (World w : {World::kImf, World::kCauLin, World::kCauAnm, World::kProp1Bernoulli, World::kVarianceExample})
    EXPECT_EQ(ParseWorld(WorldName(w)), w);
  EXPECT_THROW(ParseWorld("GERMAN"), Error);
}

TEST(BuildWorld, ProtectedEncodings) {
  EXPECT_EQ(BuildWorld(World::kImf).protected_domain(), (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(BuildWorld(World::kCauAnm).protected_domain(), (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(BuildWorld(World::kProp1Bernoulli).protected_domain(), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(BuildWorld(World::kVarianceExample).protected_domain(), (std::vector<double>{0.0, 1.0}));
}

TEST(BuildWorld, VarianceExampleGroupVariances) {
  const Scm scm = BuildWorld(World::kVarianceExample);
  std::vector<double> g0, g1;
  for (const auto& v : SampleInstances(scm, 40000, 3)) (v.values[0] == 0.0 ? g0 : g1).push_back(v.values[1]);
  EXPECT_NEAR(Of(g0).var, 4.0, 0.15);
  EXPECT_NEAR(Of(g1).var, 1.0, 0.04);
  EXPECT_NEAR(Of(g0).mean, 0.0, 0.05);
}

TEST(BuildWorld, Prop1FeatureIsFairCoinInBothGroups) {
  const Scm scm = BuildWorld(World::kProp1Bernoulli);
  double n[2] = {0, 0}, ones[2] = {0, 0};
  for (const auto& v : SampleInstances(scm, 40000, 4)) {
    const int g = static_cast<int>(v.values[0]);
    n[g] += 1;
    ones[g] += v.values[1];
  }
  EXPECT_NEAR(ones[0] / n[0], 0.5, 0.015);
  EXPECT_NEAR(ones[1] / n[1], 0.5, 0.015);
}

std::vector<double> Column(const std::vector<Instance>& data, std::size_t j) {
  std::vector<double> xs;
  for (const auto& v : data) xs.push_back(v.values[j]);
  return xs;
}

class Standardization : public ::testing::TestWithParam<World> {};

// x1, x2 in every world and x3 in IMF sit in the loose unit band; the x3 of the
// causal worlds is a sum of several unit-variance terms and is checked exactly below.
TEST_P(Standardization, FeaturesRoughlyStandardised) {
  const Scm scm = BuildWorld(GetParam());
  const auto data = SampleInstances(scm, 10000, 11);
  for (std::size_t j : scm.feature_indices()) {
    if (GetParam() != World::kImf && scm.variable(j).name == "x3") continue;
    const Moments m = Of(Column(data, j));
    EXPECT_GE(m.mean, -0.15) << scm.variable(j).name;
    EXPECT_LE(m.mean, 0.15) << scm.variable(j).name;
    EXPECT_GE(m.var, 0.8) << scm.variable(j).name;
    EXPECT_LE(m.var, 1.6) << scm.variable(j).name;
  }
}

INSTANTIATE_TEST_SUITE_P(Worlds, Standardization, ::testing::Values(World::kImf, World::kCauLin, World::kCauAnm),
                         [](const auto& info) {
                           std::string n(WorldName(info.param));
                           for (char& c : n) if (c == '-') c = '_';
                           return n;
                         });

TEST(BuildWorld, CauLinX3Variance) {
  // x3 = 0.75 a + 0.5 u1 - 0.5 u2 + u3
  const Scm scm = BuildWorld(World::kCauLin);
  const Moments m = Of(Column(SampleInstances(scm, 40000, 5), 3));
  EXPECT_NEAR(m.var, 0.5625 + 0.25 + 0.25 + 1.0, 0.06);
  EXPECT_NEAR(m.mean, 0.0, 0.03);
}

TEST(BuildWorld, CauAnmX3Variance) {
  // With a^2 = 1: 0.5 a + 0.1 x1^3 = a (0.5125 + 0.15 u1^2) + 0.075 u1 + 0.1 u1^3,
  // whose second moment is 0.48391 + 0.200625; x2^3 adds 0.01 * E[u^6] = 0.15.
  const Scm scm = BuildWorld(World::kCauAnm);
  const Moments m = Of(Column(SampleInstances(scm, 200000, 5), 3));
  EXPECT_NEAR(m.var, 0.48391 + 0.200625 + 0.15 + 1.0, 0.05);
  EXPECT_NEAR(m.mean, 0.0, 0.02);
}

TEST(Labels, ScoresAtHandPoints) {
  EXPECT_NEAR(LinearLabelScore(0.8, -0.2, 0.6), 1.0 / (1.0 + std::exp(-3.2)), 1e-12);
  EXPECT_NEAR(LinearLabelScore(0.8, -0.2, 0.6), 0.9608, 1e-4);
  EXPECT_NEAR(NonlinearLabelScore(0.0, 0.0, 0.0), 1.0 / (1.0 + std::exp(4.0)), 1e-12);
  EXPECT_NEAR(NonlinearLabelScore(0.0, 0.0, 0.0), 0.0180, 1e-4);
}

TEST(Labels, LinearLabelsRoughlyBalancedOnImf) {
  const Scm scm = BuildWorld(World::kImf);
  const auto data = GenerateLabels(scm, SampleInstances(scm, 10000, 6), {}, 7);
  double pos = 0;
  for (const auto& v : data) pos += *v.label == 1;
  EXPECT_GE(pos / 1e4, 0.4);
  EXPECT_LE(pos / 1e4, 0.6);
}

TEST(Labels, SignFormIgnoresSeedAndMapsZeroToNegative) {
  const Scm scm = BuildWorld(World::kVarianceExample);
  std::vector<Instance> data = SampleInstances(scm, 200, 8);
  data.push_back(Instance{{1.0, 0.0}, std::nullopt, std::nullopt});
  LabelModel sign{LabelForm::kDeterministicSign, 0.0, "x"};
  const auto a = GenerateLabels(scm, data, sign, 1);
  const auto b = GenerateLabels(scm, data, sign, 2);
  EXPECT_EQ(a, b);
  for (const auto& v : a) EXPECT_EQ(*v.label, Sign(v.values[1]));
  EXPECT_EQ(*a.back().label, -1);
}

TEST(Labels, LogisticLabelsAreSeeded) {
  const Scm scm = BuildWorld(World::kImf);
  const auto data = SampleInstances(scm, 300, 9);
  EXPECT_EQ(GenerateLabels(scm, data, {}, 1), GenerateLabels(scm, data, {}, 1));
  EXPECT_NE(GenerateLabels(scm, data, {}, 1), GenerateLabels(scm, data, {}, 2));
}

TEST(Labels, MissingVariable) {
  const Scm scm = BuildWorld(World::kVarianceExample);
  try {
    GenerateLabels(scm, SampleInstances(scm, 10, 1), {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingVariable);
  }
}

TEST(Subsidy, TreatedIndividualOfGroupZero) {
  const Scm scm = ApplySubsidy(BuildWorld(World::kVarianceExample), {1.0, -0.75, 1.5});
  const Instance v = PushForward(scm, Noise(scm, {{"u_a", 0.0}, {"u_t", 0.3}, {"u_x", -1.0}}));
  EXPECT_EQ(v.values[scm.index("t")], 1.0);
  EXPECT_NEAR(v.values[scm.index("x")], -0.5, 1e-12);
}

TEST(Subsidy, GroupOneIsNeverTreated) {
  const Scm scm = ApplySubsidy(BuildWorld(World::kVarianceExample), {1.0, -0.75, 1.5});
  const Instance v = PushForward(scm, Noise(scm, {{"u_a", 1.0}, {"u_t", 0.3}, {"u_x", -1.0}}));
  EXPECT_EQ(v.values[scm.index("t")], 0.0);
  EXPECT_NEAR(v.values[scm.index("x")], -1.0, 1e-12);
}

TEST(Subsidy, NullPolicyMatchesBase) {
  const Scm base = BuildWorld(World::kVarianceExample);
  const Scm sub = ApplySubsidy(base, {0.0, -1.0, 2.0});
  const auto a = SampleInstances(base, 2000, 12);
  const auto b = SampleInstances(sub, 2000, 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].values[1], b[i].values[sub.index("x")]);
    EXPECT_EQ(b[i].values[sub.index("t")], 0.0);
  }
}

TEST(Subsidy, NeverFlipsTheSign) {
  const Scm base = BuildWorld(World::kVarianceExample);
  for (double t : {-2.0, -1.0, -0.3, 0.0}) {
    for (double frac : {0.0, 0.5, 1.0}) {
      const SubsidyPolicy policy{0.7, t, -2.0 * t * frac};
      const Scm sub = ApplySubsidy(base, policy);
      const auto a = SampleInstances(base, 3000, 13);
      const auto b = SampleInstances(sub, 3000, 13);
      for (std::size_t i = 0; i < a.size(); ++i)
        ASSERT_EQ(Sign(a[i].values[1]), Sign(b[i].values[sub.index("x")])) << "t=" << t << " i=" << i;
    }
  }
}

TEST(Subsidy, Violations) {
  const Scm base = BuildWorld(World::kVarianceExample);
  for (const SubsidyPolicy& p : {SubsidyPolicy{1.0, -0.5, 1.01}, SubsidyPolicy{1.0, 0.1, 0.0},
                                 SubsidyPolicy{1.5, -1.0, 1.0}, SubsidyPolicy{1.0, -1.0, -0.1}}) {
    try {
      ApplySubsidy(base, p);
      FAIL() << p.p << " " << p.t << " " << p.s;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kPolicyViolation);
    }
  }
}

}  // namespace
}  // namespace fairrec
