#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fairrec/classifiers.hpp"
#include "fairrec/scm.hpp"
#include "fairrec/worlds.hpp"

namespace fairrec {

struct PolicyOutcome {
  SubsidyPolicy policy;
  double benefit = 0.0;  // gap_before - gap_after
  double cost = 0.0;     // s * treated
  double proportion_treated = 0.0;            // treated / members of the eligible group (A = 0)
  double proportion_treated_negatives = 0.0;  // treated / negatively classified members of A = 0
  std::size_t treated = 0;
  double gap_before = 0.0;
  double gap_after = 0.0;
  std::size_t label_changes = 0;  // predictions that differ between matched draws
};

// Recourse cost of one individual, given its endogenous values laid out as in
// the base SCM. Defaults to the distance to the decision boundary.
using RecourseCostFn = std::function<double(std::span<const double> values)>;

// Samples n matched individuals from `base` and from the subsidised world
// (shared exogenous draws) and compares the gap between group means of the
// recourse cost among negatively classified individuals. `model` reads the
// base SCM's layout. Throws kPolicyViolation, kInvalidArgument when no cost
// function is given for a model without an affine decision function.
PolicyOutcome SimulatePolicy(const Scm& base, const SubsidyPolicy& policy, const ClassifierModel& model,
                             std::size_t n, std::uint64_t seed, const RecourseCostFn& cost = {});

// One outcome per threshold with s = -2t, sorted by t, all on the same seed.
std::vector<PolicyOutcome> SweepPolicies(const Scm& base, const ClassifierModel& model,
                                         std::vector<double> thresholds, double p, std::size_t n,
                                         std::uint64_t seed, int workers = 1,
                                         const RecourseCostFn& cost = {});

// Columns p, t, s, benefit, cost, proportion_treated, gap_after, plus
// gap_before, treated and proportion_treated_negatives.
std::string PolicyCsv(const std::vector<PolicyOutcome>& outcomes);

}  // namespace fairrec
