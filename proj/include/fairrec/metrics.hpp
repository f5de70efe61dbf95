#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairrec/classifiers.hpp"
#include "fairrec/recourse.hpp"
#include "fairrec/scm.hpp"

namespace fairrec {

// Groups are keyed by the protected values observed in the data, ascending.
struct GroupPartition {
  std::size_t protected_index = 0;
  std::vector<double> values;
  std::vector<std::vector<std::size_t>> members;    // data indices per group
  std::vector<std::vector<std::size_t>> negatives;  // predicted -1, capped, ascending
  std::vector<std::size_t> negatives_before_cap;
  std::vector<double> empty_negative_groups;        // values with no negative member

  std::size_t sampled() const;
};

// Exogenous classifier inputs come from each instance's recorded noise, or
// from abduction under `scm` when absent. Throws kEmptyNegativeGroup when no
// group has a negative member; groups without negatives are listed instead.
GroupPartition Partition(const std::vector<Instance>& data, const ClassifierModel& model,
                         const Scm& scm, std::optional<std::size_t> cap, std::uint64_t seed);

struct MetricContext {
  const Scm* oracle = nullptr;  // ground truth: twins, validity, missing noise
  const Scm* search = nullptr;  // SCM searched for causal recourse; null = oracle
  ActionSpace causal_space;     // actionable set and training ranges for r^MINT
  ActionSpace imf_space;        // all features, for r^IW
  CostKind causal_cost = CostKind::kL2Intervention;
  CostKind imf_cost = CostKind::kL2Endpoint;
  int workers = 1;
};

struct MetricRequest {
  bool dist = true;
  bool cost = true;
  bool ind = true;
};

struct IndividualRecord {
  std::size_t index = 0;  // into the data
  double group = 0.0;
  double imf_cost = 0.0;            // r^IW; +inf if no grid action flips the prediction
  std::optional<double> margin;     // |f(x)|, in units of the margin 1/||w||
  double causal_cost = 0.0;         // r^MINT; +inf if infeasible or invalid
  std::string causal_action;
  bool causal_found = false;
  std::optional<bool> causal_valid;  // set when searching under an estimated SCM
  // Parallel to the SCM's protected domain; the own-group entry repeats
  // causal_cost. Twins predicted positive cost 0.
  std::vector<double> twin_costs;
  std::vector<bool> twin_positive;
  std::vector<std::optional<bool>> twin_valid;
};

struct FairnessReport {
  std::vector<double> groups;  // partition values
  std::vector<double> imf_group_mean;     // NaN where a group has no usable entry
  std::vector<double> margin_group_mean;
  std::vector<double> causal_group_mean;
  double delta_dist = 0.0;
  std::optional<double> delta_dist_margin;  // affine-in-feature-map models only
  double delta_cost = 0.0;
  double delta_ind = 0.0;
  std::vector<IndividualRecord> individuals;
  std::size_t imf_infeasible = 0;
  std::size_t causal_infeasible = 0;
  std::size_t causal_invalid = 0;
  std::size_t twin_infeasible = 0;
  std::size_t twin_invalid = 0;
  std::size_t twin_pairs = 0;  // pairs entering delta_ind
  std::optional<double> validity_fraction;  // valid / found, estimated SCMs only
  std::vector<std::string> warnings;
};

// max over pairs of |m_a - m_a'| among finite entries; 0 with fewer than two.
double MaxPairwiseGap(const std::vector<double>& means);

// One pass over the sampled negatives computing whatever `what` asks for.
// Throws kEmptyNegativeGroup when a group-level delta is requested and fewer
// than two groups have sampled negatives.
FairnessReport EvaluateFairness(const std::vector<Instance>& data, const GroupPartition& partition,
                                const ClassifierModel& model, const MetricContext& ctx,
                                MetricRequest what = {});

FairnessReport DeltaDist(const std::vector<Instance>& data, const GroupPartition& partition,
                         const ClassifierModel& model, const MetricContext& ctx);
FairnessReport DeltaCost(const std::vector<Instance>& data, const GroupPartition& partition,
                         const ClassifierModel& model, const MetricContext& ctx);
FairnessReport DeltaInd(const std::vector<Instance>& data, const GroupPartition& partition,
                        const ClassifierModel& model, const MetricContext& ctx);

// CSV of the per-individual table, one twin column per protected value.
std::string IndividualsCsv(const FairnessReport& report, const Scm& scm);
// Key,value summary.
std::string SummaryCsv(const FairnessReport& report);

}  // namespace fairrec
