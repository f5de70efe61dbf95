#include "fairrec/scm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "fairrec/error.hpp"
#include "fairrec/worlds.hpp"

namespace fairrec {
namespace {

Instance Obs(std::vector<double> values) { return Instance{std::move(values), std::nullopt, std::nullopt}; }

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

TEST(TopologicalOrder, CauLin) {
  EXPECT_EQ(TopologicalOrderNames(BuildWorld(World::kCauLin)),
            (std::vector<std::string>{"a", "x1", "x2", "x3"}));
}

TEST(TopologicalOrder, ImfPutsAFirst) {
  const auto names = TopologicalOrderNames(BuildWorld(World::kImf));
  EXPECT_EQ(names.front(), "a");
}

TEST(TopologicalOrder, TieBreakIsDeclarationOrder) {
  // x2 declared before x1 and neither depends on the other.
  Scm scm({{"a", VariableKind::kProtected}, {"x2", VariableKind::kFeature}, {"x1", VariableKind::kFeature}},
          {{"u_a", BernoulliNoise{}}, {"u1", GaussianNoise{}}, {"u2", GaussianNoise{}}},
          {{"x1", {}, "u1", AffineInNoise{}}, {"a", {}, "u_a", AffineInNoise{}},
           {"x2", {"a"}, "u2", AffineInNoise{1.0, {}, 0.0, {1.0}}}});
  EXPECT_EQ(TopologicalOrderNames(scm), (std::vector<std::string>{"a", "x2", "x1"}));
}

TEST(Scm, CycleIsRejected) {
  auto eqs = BuildWorld(World::kCauLin).named_equations();
  eqs[1].parents = {"a", "x3"};
  eqs[1].mechanism = AffineInNoise{1.0, {}, 0.0, {0.5, 1.0}};
  const Scm base = BuildWorld(World::kCauLin);
  EXPECT_EQ(CodeOf([&] { Scm(base.variables(), base.exogenous(), eqs); }), ErrorCode::kCycleDetected);
}

TEST(Scm, ConstructionValidation) {
  const Scm base = BuildWorld(World::kImf);
  auto eqs = base.named_equations();
  eqs[2].parents = {"nope"};
  EXPECT_EQ(CodeOf([&] { Scm(base.variables(), base.exogenous(), eqs); }), ErrorCode::kUnknownVariable);
  eqs = base.named_equations();
  eqs[2].noise = "u_missing";
  EXPECT_EQ(CodeOf([&] { Scm(base.variables(), base.exogenous(), eqs); }), ErrorCode::kMissingNoise);
  auto vars = base.variables();
  vars[1].kind = VariableKind::kProtected;
  EXPECT_EQ(CodeOf([&] { Scm(vars, base.exogenous(), base.named_equations()); }),
            ErrorCode::kInvalidArgument);
  auto noise = base.exogenous();
  noise[1].noise = GaussianNoise{0.0, -1.0};
  EXPECT_EQ(CodeOf([&] { Scm(base.variables(), noise, base.named_equations()); }),
            ErrorCode::kInvalidArgument);
  eqs = base.named_equations();
  eqs.pop_back();
  EXPECT_EQ(CodeOf([&] { Scm(base.variables(), base.exogenous(), eqs); }), ErrorCode::kInvalidArgument);
}

TEST(Scm, ProtectedDomains) {
  EXPECT_EQ(BuildWorld(World::kImf).protected_domain(), (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(BuildWorld(World::kProp1Bernoulli).protected_domain(), (std::vector<double>{0.0, 1.0}));
}

TEST(Scm, MechanismClasses) {
  const Scm cau = BuildWorld(World::kCauAnm);
  EXPECT_EQ(cau.equation(cau.index("a")).cls, MechanismClass::kRootAssignment);
  EXPECT_EQ(cau.equation(cau.index("x1")).cls, MechanismClass::kAdditiveNoise);
  EXPECT_EQ(cau.equation(cau.index("x3")).cls, MechanismClass::kAdditiveNoise);
  const Scm var = BuildWorld(World::kVarianceExample);
  EXPECT_EQ(var.equation(var.index("x")).cls, MechanismClass::kInvertibleInNoise);
}

TEST(SampleExogenous, BernoulliMean) {
  Scm scm({{"a", VariableKind::kProtected}}, {{"u", BernoulliNoise{0.5}}}, {{"a", {}, "u", AffineInNoise{}}});
  const auto draws = SampleExogenous(scm, 10000, 7);
  double mean = 0.0;
  for (const auto& u : draws) mean += u[0];
  mean /= draws.size();
  EXPECT_GE(mean, 0.45);
  EXPECT_LE(mean, 0.55);
}

TEST(SampleExogenous, GaussianVariance) {
  Scm scm({{"a", VariableKind::kProtected}, {"x", VariableKind::kFeature}},
          {{"u_a", BernoulliNoise{0.5}}, {"u", GaussianNoise{0.0, 1.0}}},
          {{"a", {}, "u_a", AffineInNoise{}}, {"x", {}, "u", AffineInNoise{}}});
  const auto draws = SampleExogenous(scm, 10000, 7);
  double mean = 0.0, sq = 0.0;
  for (const auto& u : draws) mean += u[1];
  mean /= draws.size();
  for (const auto& u : draws) sq += (u[1] - mean) * (u[1] - mean);
  const double var = sq / (draws.size() - 1);
  EXPECT_GE(var, 0.9);
  EXPECT_LE(var, 1.1);
}

TEST(SampleExogenous, DeterministicAndRejectsZero) {
  const Scm scm = BuildWorld(World::kCauLin);
  EXPECT_EQ(SampleExogenous(scm, 50, 3), SampleExogenous(scm, 50, 3));
  EXPECT_NE(SampleExogenous(scm, 50, 3), SampleExogenous(scm, 50, 4));
  EXPECT_EQ(CodeOf([&] { SampleExogenous(scm, 0, 1); }), ErrorCode::kInvalidArgument);
}

TEST(SampleExogenous, SharedNamesShareDraws) {
  const auto imf = SampleExogenous(BuildWorld(World::kImf), 20, 9);
  const auto cau = SampleExogenous(BuildWorld(World::kCauAnm), 20, 9);
  EXPECT_EQ(imf, cau);
}

TEST(PushForward, ImfHandEvaluated) {
  const Scm scm = BuildWorld(World::kImf);
  const Instance v = PushForward(scm, {1.0, 0.3, -0.2, 0.1});
  EXPECT_DOUBLE_EQ(v.values[0], 1.0);
  EXPECT_DOUBLE_EQ(v.values[1], 0.8);
  EXPECT_DOUBLE_EQ(v.values[2], -0.2);
  EXPECT_DOUBLE_EQ(v.values[3], 0.6);
  ASSERT_TRUE(v.exogenous.has_value());
  EXPECT_EQ(*v.exogenous, (ExogenousVector{1.0, 0.3, -0.2, 0.1}));
}

TEST(PushForward, OneFeatureWorlds) {
  const Instance v2 = PushForward(BuildWorld(World::kVarianceExample), {1.0, 0.5});
  EXPECT_DOUBLE_EQ(v2.values[0], 1.0);
  EXPECT_DOUBLE_EQ(v2.values[1], 0.5);
  const Instance v1 = PushForward(BuildWorld(World::kProp1Bernoulli), {1.0, 1.0});
  EXPECT_DOUBLE_EQ(v1.values[0], 1.0);
  EXPECT_DOUBLE_EQ(v1.values[1], 1.0);
}

TEST(PushForward, MissingNoise) {
  EXPECT_EQ(CodeOf([] { PushForward(BuildWorld(World::kImf), {1.0, 0.3}); }), ErrorCode::kMissingNoise);
}

TEST(Abduct, VarianceExample) {
  const auto u = Abduct(BuildWorld(World::kVarianceExample), Obs({1.0, 0.5}));
  EXPECT_DOUBLE_EQ(u[0], 1.0);
  EXPECT_DOUBLE_EQ(u[1], 0.5);
}

TEST(Abduct, Prop1) {
  const auto u = Abduct(BuildWorld(World::kProp1Bernoulli), Obs({0.0, 0.0}));
  EXPECT_DOUBLE_EQ(u[0], 0.0);
  EXPECT_DOUBLE_EQ(u[1], 1.0);
}

TEST(Abduct, SignedRootInverts) {
  const Scm scm = BuildWorld(World::kCauLin);
  EXPECT_DOUBLE_EQ(Abduct(scm, Obs({-1.0, 0, 0, 0}))[0], 0.0);
  EXPECT_DOUBLE_EQ(Abduct(scm, Obs({1.0, 0, 0, 0}))[0], 1.0);
}

TEST(Abduct, NonInvertibleRejected) {
  const Scm sub = ApplySubsidy(BuildWorld(World::kVarianceExample), {1.0, -0.75, 1.5});
  EXPECT_EQ(CodeOf([&] { Abduct(sub, Obs({0.0, 1.0, -0.5})); }), ErrorCode::kNotInvertible);
}

class RoundTrip : public ::testing::TestWithParam<World> {};

TEST_P(RoundTrip, PushForwardOfAbductionReproducesInstance) {
  const Scm scm = BuildWorld(GetParam());
  for (const auto& v : SampleInstances(scm, 1000, 21)) {
    const Instance w = PushForward(scm, Abduct(scm, v));
    for (std::size_t i = 0; i < v.values.size(); ++i) ASSERT_NEAR(w.values[i], v.values[i], 1e-10);
  }
}

TEST_P(RoundTrip, AbductionRecoversSampledNoise) {
  const Scm scm = BuildWorld(GetParam());
  for (const auto& v : SampleInstances(scm, 200, 22)) {
    const auto u = Abduct(scm, v);
    for (std::size_t j = 0; j < u.size(); ++j) ASSERT_NEAR(u[j], (*v.exogenous)[j], 1e-10);
  }
}

TEST_P(RoundTrip, IdentityCounterfactualIsExact) {
  const Scm scm = BuildWorld(GetParam());
  for (const auto& v : SampleInstances(scm, 300, 23)) {
    EXPECT_EQ(Counterfactual(scm, v, {}).values, v.values);
  }
}

TEST_P(RoundTrip, NonDescendantsStableUnderTwins) {
  const Scm scm = BuildWorld(GetParam());
  const auto desc = scm.descendants(scm.protected_index(), true);
  for (const auto& v : SampleInstances(scm, 300, 24)) {
    for (double a : scm.protected_domain()) {
      const Instance twin = CounterfactualTwin(scm, v, a);
      for (std::size_t i = 0; i < v.values.size(); ++i) {
        if (!desc[i]) ASSERT_EQ(twin.values[i], v.values[i]);
      }
    }
  }
}

TEST_P(RoundTrip, TwinOfTwinIsOriginal) {
  const Scm scm = BuildWorld(GetParam());
  for (const auto& v : SampleInstances(scm, 300, 25)) {
    const double a = v.values[scm.protected_index()];
    const double other = scm.protected_domain().front() == a ? scm.protected_domain().back()
                                                             : scm.protected_domain().front();
    const Instance back = CounterfactualTwin(scm, CounterfactualTwin(scm, v, other), a);
    for (std::size_t i = 0; i < v.values.size(); ++i) ASSERT_NEAR(back.values[i], v.values[i], 1e-12);
    EXPECT_EQ(CounterfactualTwin(scm, v, a).values, v.values);
  }
}

TEST_P(RoundTrip, InterventionScreening) {
  const Scm scm = BuildWorld(GetParam());
  const std::size_t target = scm.feature_indices().front();
  const Scm done = ApplyIntervention(scm, {{{target, 0.37}}});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& v : SampleInstances(done, 100, seed)) ASSERT_EQ(v.values[target], 0.37);
  }
}

INSTANTIATE_TEST_SUITE_P(OracleWorlds, RoundTrip,
                         ::testing::Values(World::kImf, World::kCauLin, World::kCauAnm,
                                           World::kProp1Bernoulli, World::kVarianceExample),
                         [](const auto& info) {
                           std::string n(WorldName(info.param));
                           for (char& c : n) if (c == '-') c = '_';
                           return n;
                         });

TEST(ApplyIntervention, EmptyIsStructurallyEqual) {
  const Scm scm = BuildWorld(World::kCauAnm);
  EXPECT_TRUE(ApplyIntervention(scm, {}) == scm);
}

TEST(ApplyIntervention, CauLinDownstreamResponse) {
  const Scm scm = BuildWorld(World::kCauLin);
  const Scm done = ApplyIntervention(scm, MakeIntervention(scm, {{"x1", 2.0}}));
  for (const auto& v : SampleInstances(done, 200, 5)) {
    const auto& u = *v.exogenous;
    ASSERT_EQ(v.values[1], 2.0);
    ASSERT_NEAR(v.values[3], 0.5 * (v.values[0] + 2.0 - v.values[2]) + u[3], 1e-12);
  }
  // The original is untouched.
  EXPECT_EQ(scm.equation(1).cls, MechanismClass::kAdditiveNoise);
}

TEST(ApplyIntervention, ImfX2HasNoChildren) {
  const Scm scm = BuildWorld(World::kImf);
  const Scm done = ApplyIntervention(scm, MakeIntervention(scm, {{"x2", 0.0}}));
  const auto before = SampleInstances(scm, 100, 8);
  const auto after = SampleInstances(done, 100, 8);
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(before[i].values[1], after[i].values[1]);
    EXPECT_EQ(before[i].values[3], after[i].values[3]);
  }
}

TEST(ApplyIntervention, UnknownTarget) {
  const Scm scm = BuildWorld(World::kImf);
  EXPECT_EQ(CodeOf([&] { MakeIntervention(scm, {{"u1", 1.0}}); }), ErrorCode::kUnknownTarget);
  EXPECT_EQ(CodeOf([&] { ApplyIntervention(scm, {{{17, 1.0}}}); }), ErrorCode::kUnknownTarget);
}

TEST(Counterfactual, VarianceExampleDoubles) {
  const Scm scm = BuildWorld(World::kVarianceExample);
  const Instance cf = Counterfactual(scm, Obs({1.0, 0.5}), MakeIntervention(scm, {{"a", 0.0}}));
  EXPECT_DOUBLE_EQ(cf.values[0], 0.0);
  EXPECT_DOUBLE_EQ(cf.values[1], 1.0);
}

TEST(Counterfactual, Prop1Flips) {
  const Scm scm = BuildWorld(World::kProp1Bernoulli);
  const Instance cf = Counterfactual(scm, Obs({1.0, 1.0}), MakeIntervention(scm, {{"a", 0.0}}));
  EXPECT_DOUBLE_EQ(cf.values[0], 0.0);
  EXPECT_DOUBLE_EQ(cf.values[1], 0.0);
}

TEST(CounterfactualTwin, VarianceExample) {
  const Instance twin = CounterfactualTwin(BuildWorld(World::kVarianceExample), Obs({1.0, -0.5}), 0.0);
  EXPECT_DOUBLE_EQ(twin.values[0], 0.0);
  EXPECT_DOUBLE_EQ(twin.values[1], -1.0);
}

TEST(CounterfactualTwin, ImfKeepsX2) {
  const Scm scm = BuildWorld(World::kImf);
  const Instance twin = CounterfactualTwin(scm, Obs({1.0, 0.4, 0.123, -0.3}), -1.0);
  EXPECT_EQ(twin.values[2], 0.123);
  EXPECT_DOUBLE_EQ(twin.values[1], -0.6);
}

TEST(CounterfactualTwin, OutsideDomain) {
  EXPECT_EQ(CodeOf([] { CounterfactualTwin(BuildWorld(World::kImf), Obs({1, 0, 0, 0}), 0.0); }),
            ErrorCode::kInvalidArgument);
}

TEST(Descendants, CauLin) {
  const Scm scm = BuildWorld(World::kCauLin);
  EXPECT_EQ(scm.descendants(1, false), (std::vector<bool>{false, false, false, true}));
  EXPECT_EQ(scm.descendants(0, true), (std::vector<bool>{true, true, false, true}));
  EXPECT_EQ(BuildWorld(World::kImf).descendants(2, false), (std::vector<bool>(4, false)));
}

TEST(Mechanisms, AdditiveNoiseIdentity) {
  const std::vector<Mechanism> mechanisms = {
      AffineInNoise{1.0, {}, 0.3, {0.5, -1.0}},
      AdditivePolynomial{0.2, {{0, 0.1, 3}, {1, -0.7, 2}}},
      AdditiveKernelRidge{0.1, 0.8, {0.0, 1.0, -1.0, 0.5}, {0.4, -0.2}},
  };
  const double pa[] = {0.7, -1.3};
  for (const auto& m : mechanisms) {
    for (double u : {-2.0, -0.1, 0.0, 0.4, 3.0}) {
      EXPECT_EQ(EvaluateMechanism(m, pa, u) - EvaluateMechanism(m, pa, 0.0),
                u + EvaluateMechanism(m, pa, 0.0) - EvaluateMechanism(m, pa, 0.0));
      EXPECT_NEAR(EvaluateMechanism(m, pa, u) - EvaluateMechanism(m, pa, 0.0), u, 1e-14);
      EXPECT_NEAR(*InvertMechanism(m, pa, EvaluateMechanism(m, pa, u)), u, 1e-14);
    }
  }
}

TEST(Mechanisms, KernelRidgeByHand) {
  // Single 1-d center at 0 with weight 2: f(p) = 0.5 + 2 exp(-p^2).
  const AdditiveKernelRidge m{0.5, 1.0, {0.0}, {2.0}};
  const double pa[] = {1.0};
  EXPECT_NEAR(EvaluateMechanism(m, pa, 0.25), 0.5 + 2.0 * std::exp(-1.0) + 0.25, 1e-15);
}

}  // namespace
}  // namespace fairrec
