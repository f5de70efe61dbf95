#include "fairrec/worlds.hpp"

#include <cmath>

#include "fairrec/error.hpp"

namespace fairrec {
namespace {

AffineInNoise SignedRoot() { return AffineInNoise{2.0, {}, -1.0, {}}; }
AffineInNoise IdentityRoot() { return AffineInNoise{1.0, {}, 0.0, {}}; }
AffineInNoise Additive(std::vector<double> offset_coeffs) {
  return AffineInNoise{1.0, {}, 0.0, std::move(offset_coeffs)};
}

Scm ThreeFeatureWorld(World world) {
  std::vector<Variable> vars = {{"a", VariableKind::kProtected},
                                {"x1", VariableKind::kFeature},
                                {"x2", VariableKind::kFeature},
                                {"x3", VariableKind::kFeature}};
  std::vector<ExogenousSpec> noise = {{"u_a", BernoulliNoise{0.5}},
                                      {"u1", GaussianNoise{0.0, 1.0}},
                                      {"u2", GaussianNoise{0.0, 1.0}},
                                      {"u3", GaussianNoise{0.0, 1.0}}};
  std::vector<StructuralEquation> eqs;
  eqs.push_back({"a", {}, "u_a", SignedRoot()});
  eqs.push_back({"x1", {"a"}, "u1", Additive({0.5})});
  eqs.push_back({"x2", {}, "u2", IdentityRoot()});
  switch (world) {
    case World::kImf:
      eqs.push_back({"x3", {"a"}, "u3", Additive({0.5})});
      break;
    case World::kCauLin:
      eqs.push_back({"x3", {"a", "x1", "x2"}, "u3", Additive({0.5, 0.5, -0.5})});
      break;
    default:
      eqs.push_back({"x3", {"a", "x1", "x2"}, "u3",
                     AdditivePolynomial{0.0, {{0, 0.5, 1}, {1, 0.1, 3}, {2, -0.1, 3}}}});
      break;
  }
  return Scm(std::move(vars), std::move(noise), std::move(eqs));
}

Scm OneFeatureWorld(World world) {
  std::vector<Variable> vars = {{"a", VariableKind::kProtected}, {"x", VariableKind::kFeature}};
  std::vector<ExogenousSpec> noise = {{"u_a", BernoulliNoise{0.5}}};
  std::vector<StructuralEquation> eqs;
  eqs.push_back({"a", {}, "u_a", IdentityRoot()});
  if (world == World::kProp1Bernoulli) {
    noise.push_back({"u_x", BernoulliNoise{0.5}});
    // X := A U_X + (1 - A)(1 - U_X) = (2A - 1) U_X + (1 - A)
    eqs.push_back({"x", {"a"}, "u_x", AffineInNoise{-1.0, {2.0}, 1.0, {-1.0}}});
  } else {
    noise.push_back({"u_x", GaussianNoise{0.0, 1.0}});
    eqs.push_back({"x", {"a"}, "u_x", AffineInNoise{2.0, {-1.0}, 0.0, {}}});
  }
  return Scm(std::move(vars), std::move(noise), std::move(eqs));
}

double Logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::string_view WorldName(World world) {
  switch (world) {
    case World::kImf: return "IMF";
    case World::kCauLin: return "CAU-LIN";
    case World::kCauAnm: return "CAU-ANM";
    case World::kProp1Bernoulli: return "PROP1-BERNOULLI";
    case World::kVarianceExample: return "VARIANCE-EXAMPLE";
  }
  return "?";
}

World ParseWorld(std::string_view name) {
  for (World w : {World::kImf, World::kCauLin, World::kCauAnm, World::kProp1Bernoulli,
                  World::kVarianceExample}) {
    if (WorldName(w) == name) return w;
  }
  throw Error(ErrorCode::kParseError, "unknown world '" + std::string(name) + "'");
}

Scm BuildWorld(World world) {
  switch (world) {
    case World::kImf:
    case World::kCauLin:
    case World::kCauAnm:
      return ThreeFeatureWorld(world);
    case World::kProp1Bernoulli:
    case World::kVarianceExample:
      return OneFeatureWorld(world);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown world");
}

std::vector<Instance> SampleInstances(const Scm& scm, std::size_t n, std::uint64_t seed) {
  std::vector<Instance> out;
  out.reserve(n);
  for (const auto& u : SampleExogenous(scm, n, seed)) out.push_back(PushForward(scm, u));
  return out;
}

std::string_view LabelFormName(LabelForm form) {
  switch (form) {
    case LabelForm::kLinearLogistic: return "linear";
    case LabelForm::kNonlinearLogistic: return "nonlinear";
    case LabelForm::kDeterministicSign: return "sign";
  }
  return "?";
}

LabelForm ParseLabelForm(std::string_view name) {
  if (name == "linear") return LabelForm::kLinearLogistic;
  if (name == "nonlinear") return LabelForm::kNonlinearLogistic;
  if (name == "sign") return LabelForm::kDeterministicSign;
  throw Error(ErrorCode::kParseError, "unknown label model '" + std::string(name) + "'");
}

double LinearLabelScore(double x1, double x2, double x3) { return Logistic(2.0 * (x1 - x2 + x3)); }

double NonlinearLabelScore(double x1, double x2, double x3) {
  const double s = x1 + 2.0 * x2 + x3;
  return 1.0 / (1.0 + std::exp(4.0 - s * s));
}

std::vector<Instance> GenerateLabels(const Scm& scm, std::vector<Instance> data,
                                     const LabelModel& model, std::uint64_t seed) {
  auto require = [&](std::string_view name) {
    const auto i = scm.find(name);
    if (!i) throw Error(ErrorCode::kMissingVariable, "label model reads missing variable " + std::string(name));
    return *i;
  };
  if (model.form == LabelForm::kDeterministicSign) {
    const std::size_t j = require(model.variable);
    for (auto& v : data) {
      if (v.values.size() <= j) throw Error(ErrorCode::kMissingVariable, "instance too short");
      v.label = Sign(v.values[j] - model.boundary);
    }
    return data;
  }
  const std::size_t i1 = require("x1");
  const std::size_t i2 = require("x2");
  const std::size_t i3 = require("x3");
  const std::uint32_t stream = StreamId("u_y");
  for (std::size_t row = 0; row < data.size(); ++row) {
    auto& v = data[row];
    if (v.values.size() != scm.num_endogenous())
      throw Error(ErrorCode::kMissingVariable, "instance does not cover the SCM's variables");
    const double x1 = v.values[i1], x2 = v.values[i2], x3 = v.values[i3];
    const double score = model.form == LabelForm::kLinearLogistic ? LinearLabelScore(x1, x2, x3)
                                                                   : NonlinearLabelScore(x1, x2, x3);
    const double u = RandomBlock::At(seed, row, stream).Uniform();
    v.label = u < score ? 1 : -1;
  }
  return data;
}

void SubsidyPolicy::Validate() const {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorCode::kPolicyViolation, "proportion p must lie in [0, 1]");
  if (!(t <= 0.0)) throw Error(ErrorCode::kPolicyViolation, "threshold t must be <= 0");
  if (!(s >= 0.0)) throw Error(ErrorCode::kPolicyViolation, "subsidy s must be >= 0");
  if (s > -2.0 * t) throw Error(ErrorCode::kPolicyViolation, "subsidy s exceeds -2t");
}

Scm ApplySubsidy(const Scm& base, const SubsidyPolicy& policy) {
  policy.Validate();
  const auto xi = base.find("x");
  const auto ai = base.find("a");
  if (!xi || !ai || base.num_endogenous() != 2 || !base.find_exogenous("u_x"))
    throw Error(ErrorCode::kInvalidArgument, "subsidy applies to the variance-example world only");
  std::vector<Variable> vars = {base.variable(*ai), {"t", VariableKind::kAuxiliary}, base.variable(*xi)};
  std::vector<ExogenousSpec> noise = base.exogenous();
  noise.push_back({"u_t", UniformNoise{0.0, 1.0}});
  auto named = base.named_equations();
  std::vector<StructuralEquation> eqs;
  eqs.push_back(named[*ai]);
  eqs.push_back({"t", {"a"}, "u_t", GatedIndicator{policy.p, 1.0, {-1.0}}});
  eqs.push_back({"x", {"a", "t"}, "u_x",
                 ThresholdSubsidy{AffineInNoise{2.0, {-1.0, 0.0}, 0.0, {}}, 1, policy.s, policy.t}});
  return Scm(std::move(vars), std::move(noise), std::move(eqs), base.protected_domain());
}

}  // namespace fairrec
