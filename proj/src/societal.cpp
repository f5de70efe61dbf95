#include "fairrec/societal.hpp"

#include <algorithm>
#include <cmath>

#include "fairrec/error.hpp"
#include "fairrec/io.hpp"
#include "fairrec/parallel.hpp"

namespace fairrec {

namespace {

struct GroupStats {
  double gap = 0.0;
  std::vector<bool> negative;
};

GroupStats Gap(const std::vector<std::vector<double>>& values, std::size_t pidx, const std::vector<double>& domain,
               const ClassifierModel& model, const RecourseCostFn& cost) {
  GroupStats s;
  std::vector<double> sum(domain.size(), 0.0);
  std::vector<std::size_t> count(domain.size(), 0);
  for (const auto& v : values) {
    const bool neg = PredictFromValue(DecisionValue(model, v, {})) == -1;
    s.negative.push_back(neg);
    if (!neg) continue;
    const auto g = static_cast<std::size_t>(std::find(domain.begin(), domain.end(), v[pidx]) - domain.begin());
    if (g == domain.size()) throw Error(ErrorCode::kInvalidArgument, "protected value outside the domain");
    sum[g] += cost(v);
    ++count[g];
  }
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t g = 0; g < domain.size(); ++g) {
    if (count[g] == 0) continue;
    const double m = sum[g] / static_cast<double>(count[g]);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  s.gap = hi >= lo ? hi - lo : 0.0;
  return s;
}

}  // namespace

PolicyOutcome SimulatePolicy(const Scm& base, const SubsidyPolicy& policy, const ClassifierModel& model,
                             std::size_t n, std::uint64_t seed, const RecourseCostFn& cost) {
  policy.Validate();
  if (model.selector.reads_exogenous())
    throw Error(ErrorCode::kInvalidArgument, "the policy classifier must read endogenous features only");
  RecourseCostFn distance = cost;
  if (!distance) {
    if (!MarginDistance(model, std::vector<double>(model.selector.dim(), 0.0)))
      throw Error(ErrorCode::kInvalidArgument, "no recourse cost for a classifier without an affine decision function");
    distance = [&model](std::span<const double> v) {
      std::vector<double> inputs(model.selector.dim());
      model.selector.Extract(v, {}, inputs.data());
      return *MarginDistance(model, inputs);
    };
  }
  const Scm treated_world = ApplySubsidy(base, policy);
  const auto before = SampleInstances(base, n, seed);
  const auto after = SampleInstances(treated_world, n, seed);

  // Express subsidised individuals in the base layout.
  std::vector<std::size_t> map;
  for (const auto& var : base.variables()) map.push_back(treated_world.index(var.name));
  const std::size_t t_index = treated_world.index("t");
  const std::size_t ux = *treated_world.find_exogenous(base.exogenous(*base.equation(base.index("x")).noise).name);

  std::vector<std::vector<double>> vb, va;
  for (const auto& v : before) vb.push_back(v.values);
  for (const auto& v : after) {
    std::vector<double> row;
    for (std::size_t i : map) row.push_back(v.values[i]);
    va.push_back(std::move(row));
  }
  const std::size_t pidx = base.protected_index();
  const GroupStats sb = Gap(vb, pidx, base.protected_domain(), model, distance);
  const GroupStats sa = Gap(va, pidx, base.protected_domain(), model, distance);

  PolicyOutcome out;
  out.policy = policy;
  out.gap_before = sb.gap;
  out.gap_after = sa.gap;
  out.benefit = sb.gap - sa.gap;
  std::size_t eligible = 0, eligible_negative = 0, treated_negative = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool group0 = after[i].values[map[pidx]] == 0.0;
    eligible += group0;
    eligible_negative += group0 && sb.negative[i];
    const bool treated = after[i].values[t_index] == 1.0 && (*after[i].exogenous)[ux] < policy.t;
    out.treated += treated;
    treated_negative += treated && sb.negative[i];
    out.label_changes += sb.negative[i] != sa.negative[i];
  }
  out.cost = policy.s * static_cast<double>(out.treated);
  out.proportion_treated = eligible ? static_cast<double>(out.treated) / static_cast<double>(eligible) : 0.0;
  out.proportion_treated_negatives =
      eligible_negative ? static_cast<double>(treated_negative) / static_cast<double>(eligible_negative) : 0.0;
  return out;
}

std::vector<PolicyOutcome> SweepPolicies(const Scm& base, const ClassifierModel& model,
                                         std::vector<double> thresholds, double p, std::size_t n,
                                         std::uint64_t seed, int workers, const RecourseCostFn& cost) {
  std::sort(thresholds.begin(), thresholds.end());
  for (double t : thresholds) SubsidyPolicy{p, t, -2.0 * t}.Validate();
  std::vector<PolicyOutcome> out(thresholds.size());
  ParallelFor(thresholds.size(), workers, [&](std::size_t k) {
    const double t = thresholds[k];
    out[k] = SimulatePolicy(base, SubsidyPolicy{p, t, t == 0.0 ? 0.0 : -2.0 * t}, model, n, seed, cost);
  });
  return out;
}

std::string PolicyCsv(const std::vector<PolicyOutcome>& outcomes) {
  std::string csv = "p,t,s,benefit,cost,proportion_treated,gap_after,gap_before,treated,proportion_treated_negatives\n";
  for (const auto& o : outcomes) {
    csv += FormatDouble(o.policy.p) + ',' + FormatDouble(o.policy.t) + ',' + FormatDouble(o.policy.s) + ',' +
           FormatDouble(o.benefit) + ',' + FormatDouble(o.cost) + ',' + FormatDouble(o.proportion_treated) + ',' +
           FormatDouble(o.gap_after) + ',' + FormatDouble(o.gap_before) + ',' + std::to_string(o.treated) + ',' +
           FormatDouble(o.proportion_treated_negatives) + '\n';
  }
  return csv;
}

}  // namespace fairrec
