#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fairrec/scm.hpp"

namespace fairrec {

// Named data-generating processes. IMF, CAU-LIN and CAU-ANM encode the
// protected attribute in {-1, +1} (A := 2 U_A - 1); the two one-feature
// counterexamples encode it in {0, 1} (A := U_A).
enum class World { kImf, kCauLin, kCauAnm, kProp1Bernoulli, kVarianceExample };

std::string_view WorldName(World world);
World ParseWorld(std::string_view name);  // throws kParseError

Scm BuildWorld(World world);

// n i.i.d. observations carrying their exogenous vectors.
std::vector<Instance> SampleInstances(const Scm& scm, std::size_t n, std::uint64_t seed);

enum class LabelForm { kLinearLogistic, kNonlinearLogistic, kDeterministicSign };

std::string_view LabelFormName(LabelForm form);
LabelForm ParseLabelForm(std::string_view name);

struct LabelModel {
  LabelForm form = LabelForm::kLinearLogistic;
  // Only for kDeterministicSign: y = sgn(v[variable] - boundary), sgn(0) = -1.
  double boundary = 0.0;
  std::string variable = "x";
};

// P(Y = 1 | x1, x2, x3) for the logistic forms.
double LinearLabelScore(double x1, double x2, double x3);
double NonlinearLabelScore(double x1, double x2, double x3);

// Sets label = +1 iff u_Y < score, with u_Y drawn at (seed, row i, stream "u_y").
// The sign form ignores the seed. Throws kMissingVariable if `scm` lacks a
// variable the model reads.
std::vector<Instance> GenerateLabels(const Scm& scm, std::vector<Instance> data,
                                     const LabelModel& model, std::uint64_t seed);

// sgn with the unfavourable convention at zero.
inline int Sign(double v) { return v > 0.0 ? 1 : -1; }

struct SubsidyPolicy {
  double p = 0.0;  // proportion of eligible individuals who are offered the subsidy
  double t = 0.0;  // eligibility threshold on U_X
  double s = 0.0;  // amount

  // Throws kPolicyViolation unless p in [0, 1], t <= 0 and 0 <= s <= -2t.
  void Validate() const;
};

// Adds U_T ~ Uniform[0,1], T := (1 - A) 1{U_T < p} and replaces the feature
// equation with X := (2 - A) U_X + s T 1{U_X < t}. `base` must be the
// variance-example world.
Scm ApplySubsidy(const Scm& base, const SubsidyPolicy& policy);

}  // namespace fairrec
