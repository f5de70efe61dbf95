#include "fairrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairrec/error.hpp"
#include "fairrec/io.hpp"
#include "fairrec/parallel.hpp"
#include "fairrec/rng.hpp"

namespace fairrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ExogenousVector OracleNoise(const Scm& oracle, const Instance& v) {
  if (v.exogenous) return *v.exogenous;
  return Abduct(oracle, Instance{v.values, std::nullopt, std::nullopt});
}

}  // namespace

std::size_t GroupPartition::sampled() const {
  std::size_t n = 0;
  for (const auto& g : negatives) n += g.size();
  return n;
}

GroupPartition Partition(const std::vector<Instance>& data, const ClassifierModel& model,
                         const Scm& scm, std::optional<std::size_t> cap, std::uint64_t seed) {
  GroupPartition p;
  p.protected_index = scm.protected_index();
  for (const auto& v : data) {
    if (v.values.size() != scm.num_endogenous())
      throw Error(ErrorCode::kMissingVariable, "instance width does not match the SCM");
    p.values.push_back(v.values[p.protected_index]);
  }
  std::sort(p.values.begin(), p.values.end());
  p.values.erase(std::unique(p.values.begin(), p.values.end()), p.values.end());
  const std::size_t k = p.values.size();
  p.members.resize(k);
  p.negatives.resize(k);
  p.negatives_before_cap.assign(k, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Instance& v = data[i];
    const std::size_t g = static_cast<std::size_t>(
        std::lower_bound(p.values.begin(), p.values.end(), v.values[p.protected_index]) - p.values.begin());
    p.members[g].push_back(i);
    const ExogenousVector u = model.selector.reads_exogenous() ? OracleNoise(scm, v) : ExogenousVector{};
    if (PredictFromValue(DecisionValue(model, v.values, u)) == -1) p.negatives[g].push_back(i);
  }
  bool any = false;
  for (std::size_t g = 0; g < k; ++g) {
    auto& neg = p.negatives[g];
    p.negatives_before_cap[g] = neg.size();
    if (neg.empty()) {
      p.empty_negative_groups.push_back(p.values[g]);
      continue;
    }
    any = true;
    if (cap && neg.size() > *cap) {
      CounterRng rng(seed, StreamId("partition") + static_cast<std::uint32_t>(g));
      for (std::size_t i = 0; i < *cap; ++i) std::swap(neg[i], neg[i + rng.Below(neg.size() - i)]);
      neg.resize(*cap);
      std::sort(neg.begin(), neg.end());
    }
  }
  if (!any) throw Error(ErrorCode::kEmptyNegativeGroup, "no group has a negatively classified member");
  return p;
}

double MaxPairwiseGap(const std::vector<double>& means) {
  double lo = kInf, hi = -kInf;
  std::size_t n = 0;
  for (double m : means) {
    if (!std::isfinite(m)) continue;
    lo = std::min(lo, m);
    hi = std::max(hi, m);
    ++n;
  }
  return n < 2 ? 0.0 : hi - lo;
}

FairnessReport EvaluateFairness(const std::vector<Instance>& data, const GroupPartition& partition,
                                const ClassifierModel& model, const MetricContext& ctx,
                                MetricRequest what) {
  if (ctx.oracle == nullptr) throw Error(ErrorCode::kInvalidArgument, "metrics need the oracle SCM");
  const Scm& oracle = *ctx.oracle;
  const Scm& search = ctx.search ? *ctx.search : oracle;
  const bool estimated = &search != &oracle;
  const std::size_t pidx = oracle.protected_index();
  const std::vector<double>& domain = oracle.protected_domain();

  FairnessReport report;
  report.groups = partition.values;
  std::size_t groups_with_negatives = 0;
  for (const auto& g : partition.negatives) groups_with_negatives += g.empty() ? 0 : 1;
  if ((what.dist || what.cost) && groups_with_negatives < 2)
    throw Error(ErrorCode::kEmptyNegativeGroup, "group-level metrics need negatives in at least two groups");
  for (double a : partition.empty_negative_groups)
    report.warnings.push_back("group " + FormatDouble(a) + " has no negatively classified member");
  if (what.ind && domain.size() < 2) report.warnings.push_back("single protected value: no counterfactual twins");

  std::vector<std::pair<std::size_t, std::size_t>> jobs;  // (group, data index)
  for (std::size_t g = 0; g < partition.negatives.size(); ++g)
    for (std::size_t i : partition.negatives[g]) jobs.emplace_back(g, i);
  report.individuals.resize(jobs.size());

  const bool reads_u = model.selector.reads_exogenous();
  ParallelFor(jobs.size(), ctx.workers, [&](std::size_t k) {
    const Instance& v = data[jobs[k].second];
    IndividualRecord& rec = report.individuals[k];
    rec.index = jobs[k].second;
    rec.group = v.values[pidx];
    rec.imf_cost = kNaN;
    rec.causal_cost = kNaN;
    const ExogenousVector u = OracleNoise(oracle, v);
    const std::span<const double> cu = reads_u ? std::span<const double>(u) : std::span<const double>();

    if (what.dist) {
      const RecourseResult r = SolveRecourse({v.values, {}, cu}, model, nullptr, ctx.imf_space, ctx.imf_cost);
      rec.imf_cost = r.found ? r.cost : kInf;
      if (model.selector.dim() > 0) {
        std::vector<double> inputs(model.selector.dim());
        model.selector.Extract(v.values, cu, inputs.data());
        if (MarginDistance(model, inputs)) rec.margin = std::abs(DecisionValueFromInputs(model, inputs));
      }
    }
    if (!what.cost && !what.ind) return;

    auto search_noise = [&](std::span<const double> values) {
      return estimated ? Abduct(search, Instance{{values.begin(), values.end()}, std::nullopt, std::nullopt}) : u;
    };
    const ExogenousVector su = search_noise(v.values);
    const RecourseResult r = SolveRecourse({v.values, su, cu}, model, &search, ctx.causal_space, ctx.causal_cost);
    rec.causal_found = r.found;
    if (r.found) {
      rec.causal_action = FormatIntervention(oracle, r.action);
      if (estimated) rec.causal_valid = ValidateActionWith(r.action, v.values, u, cu, model, oracle);
    }
    rec.causal_cost = r.found && rec.causal_valid.value_or(true) ? r.cost : kInf;

    if (!what.ind) return;
    rec.twin_costs.assign(domain.size(), kInf);
    rec.twin_positive.assign(domain.size(), false);
    rec.twin_valid.assign(domain.size(), std::nullopt);
    std::vector<double> twin(v.values.size());
    for (std::size_t j = 0; j < domain.size(); ++j) {
      if (domain[j] == rec.group) {
        rec.twin_costs[j] = rec.causal_cost;
        continue;
      }
      const std::pair<std::size_t, double> flip[] = {{pidx, domain[j]}};
      PropagateCounterfactual(oracle, v.values, u, flip, twin);
      if (PredictFromValue(DecisionValue(model, twin, cu)) == 1) {
        rec.twin_positive[j] = true;
        rec.twin_costs[j] = 0.0;
        continue;
      }
      const ExogenousVector tsu = search_noise(twin);
      const RecourseResult t = SolveRecourse({twin, tsu, cu}, model, &search, ctx.causal_space, ctx.causal_cost);
      if (t.found && estimated) rec.twin_valid[j] = ValidateActionWith(t.action, v.values, u, cu, model, oracle, flip);
      rec.twin_costs[j] = t.found && rec.twin_valid[j].value_or(true) ? t.cost : kInf;
    }
  });

  // Deterministic reduction in sampling order.
  const std::size_t k = partition.values.size();
  auto group_of = [&](double a) {
    return static_cast<std::size_t>(std::lower_bound(partition.values.begin(), partition.values.end(), a) -
                                    partition.values.begin());
  };
  std::vector<double> imf_sum(k, 0.0), margin_sum(k, 0.0), causal_sum(k, 0.0);
  std::vector<std::size_t> imf_n(k, 0), margin_n(k, 0), causal_n(k, 0);
  bool all_margins = what.dist;
  std::size_t found = 0, valid = 0;
  for (const IndividualRecord& rec : report.individuals) {
    const std::size_t g = group_of(rec.group);
    if (what.dist) {
      if (std::isfinite(rec.imf_cost)) {
        imf_sum[g] += rec.imf_cost;
        ++imf_n[g];
      } else {
        ++report.imf_infeasible;
      }
      if (rec.margin) {
        margin_sum[g] += *rec.margin;
        ++margin_n[g];
      } else {
        all_margins = false;
      }
    }
    if (what.cost || what.ind) {
      if (!rec.causal_found) ++report.causal_infeasible;
      if (rec.causal_valid) {
        ++found;
        if (*rec.causal_valid) ++valid;
        else ++report.causal_invalid;
      }
      if (what.cost && std::isfinite(rec.causal_cost)) {
        causal_sum[g] += rec.causal_cost;
        ++causal_n[g];
      }
    }
    if (what.ind) {
      for (std::size_t j = 0; j < rec.twin_costs.size(); ++j) {
        if (domain[j] == rec.group) continue;
        if (rec.twin_valid[j] && !*rec.twin_valid[j]) ++report.twin_invalid;
        else if (!std::isfinite(rec.twin_costs[j])) ++report.twin_infeasible;
        if (!std::isfinite(rec.causal_cost) || !std::isfinite(rec.twin_costs[j])) continue;
        ++report.twin_pairs;
        report.delta_ind = std::max(report.delta_ind, std::abs(rec.causal_cost - rec.twin_costs[j]));
      }
    }
  }
  auto means = [&](const std::vector<double>& sum, const std::vector<std::size_t>& n) {
    std::vector<double> m(k, kNaN);
    for (std::size_t g = 0; g < k; ++g)
      if (n[g] > 0) m[g] = sum[g] / static_cast<double>(n[g]);
    return m;
  };
  if (what.dist) {
    report.imf_group_mean = means(imf_sum, imf_n);
    report.delta_dist = MaxPairwiseGap(report.imf_group_mean);
    if (all_margins) {
      report.margin_group_mean = means(margin_sum, margin_n);
      report.delta_dist_margin = MaxPairwiseGap(report.margin_group_mean);
    }
  }
  if (what.cost) {
    report.causal_group_mean = means(causal_sum, causal_n);
    report.delta_cost = MaxPairwiseGap(report.causal_group_mean);
  }
  if (estimated && found > 0) report.validity_fraction = static_cast<double>(valid) / static_cast<double>(found);
  if (report.imf_infeasible > 0)
    report.warnings.push_back(std::to_string(report.imf_infeasible) + " individuals without IMF recourse on the grid");
  if (report.causal_infeasible > 0)
    report.warnings.push_back(std::to_string(report.causal_infeasible) + " individuals without causal recourse on the grid");
  if (report.causal_invalid > 0)
    report.warnings.push_back(std::to_string(report.causal_invalid) + " actions invalid under the oracle");
  return report;
}

FairnessReport DeltaDist(const std::vector<Instance>& data, const GroupPartition& partition,
                         const ClassifierModel& model, const MetricContext& ctx) {
  return EvaluateFairness(data, partition, model, ctx, {true, false, false});
}

FairnessReport DeltaCost(const std::vector<Instance>& data, const GroupPartition& partition,
                         const ClassifierModel& model, const MetricContext& ctx) {
  return EvaluateFairness(data, partition, model, ctx, {false, true, false});
}

FairnessReport DeltaInd(const std::vector<Instance>& data, const GroupPartition& partition,
                        const ClassifierModel& model, const MetricContext& ctx) {
  return EvaluateFairness(data, partition, model, ctx, {false, false, true});
}

namespace {

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return FormatDouble(v);
}

std::string Flag(const std::optional<bool>& b) { return b ? (*b ? "1" : "0") : ""; }

}  // namespace

std::string IndividualsCsv(const FairnessReport& report, const Scm& scm) {
  const std::vector<double>& domain = scm.protected_domain();
  std::string out = "index,group,imf_cost,margin,causal_cost,found,valid,action";
  for (double a : domain) out += ",twin_cost_" + Num(a);
  for (double a : domain) out += ",twin_positive_" + Num(a);
  for (double a : domain) out += ",twin_valid_" + Num(a);
  out += '\n';
  for (const IndividualRecord& r : report.individuals) {
    out += std::to_string(r.index) + ',' + Num(r.group) + ',' + Num(r.imf_cost) + ',' +
           (r.margin ? Num(*r.margin) : "") + ',' + Num(r.causal_cost) + ',' + (r.causal_found ? "1" : "0") +
           ',' + Flag(r.causal_valid) + ',' + r.causal_action;
    for (std::size_t j = 0; j < domain.size(); ++j)
      out += ',' + (j < r.twin_costs.size() ? Num(r.twin_costs[j]) : "");
    for (std::size_t j = 0; j < domain.size(); ++j)
      out += ',' + std::string(j < r.twin_positive.size() ? (r.twin_positive[j] ? "1" : "0") : "");
    for (std::size_t j = 0; j < domain.size(); ++j)
      out += ',' + (j < r.twin_valid.size() ? Flag(r.twin_valid[j]) : "");
    out += '\n';
  }
  return out;
}

std::string SummaryCsv(const FairnessReport& report) {
  std::string out = "key,value\n";
  auto row = [&](const std::string& k, const std::string& v) { out += k + ',' + v + '\n'; };
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const std::string a = Num(report.groups[g]);
    if (g < report.imf_group_mean.size()) row("imf_mean_" + a, Num(report.imf_group_mean[g]));
    if (g < report.margin_group_mean.size()) row("margin_mean_" + a, Num(report.margin_group_mean[g]));
    if (g < report.causal_group_mean.size()) row("causal_mean_" + a, Num(report.causal_group_mean[g]));
  }
  row("delta_dist", Num(report.delta_dist));
  row("delta_dist_margin", report.delta_dist_margin ? Num(*report.delta_dist_margin) : "");
  row("delta_cost", Num(report.delta_cost));
  row("delta_ind", Num(report.delta_ind));
  row("individuals", std::to_string(report.individuals.size()));
  row("imf_infeasible", std::to_string(report.imf_infeasible));
  row("causal_infeasible", std::to_string(report.causal_infeasible));
  row("causal_invalid", std::to_string(report.causal_invalid));
  row("twin_infeasible", std::to_string(report.twin_infeasible));
  row("twin_invalid", std::to_string(report.twin_invalid));
  row("twin_pairs", std::to_string(report.twin_pairs));
  row("validity_fraction", report.validity_fraction ? Num(*report.validity_fraction) : "");
  return out;
}

}  // namespace fairrec
