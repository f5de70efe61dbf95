#include "fairrec/recourse.hpp"

#include <algorithm>
#include <cmath>

#include "fairrec/error.hpp"
#include "fairrec/io.hpp"

namespace fairrec {

std::string_view CostKindName(CostKind kind) {
  return kind == CostKind::kL2Intervention ? "l2-intervention" : "l2-endpoint";
}

CostKind ParseCostKind(std::string_view name) {
  if (name == "l2-intervention") return CostKind::kL2Intervention;
  if (name == "l2-endpoint") return CostKind::kL2Endpoint;
  throw Error(ErrorCode::kParseError, "unknown cost '" + std::string(name) + "'");
}

ActionSpace ActionSpace::FromTraining(const Scm& scm, const std::vector<Instance>& train,
                                      std::vector<std::size_t> actionable, int bins) {
  if (bins < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 bins per variable");
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "action ranges need training data");
  std::sort(actionable.begin(), actionable.end());
  actionable.erase(std::unique(actionable.begin(), actionable.end()), actionable.end());
  ActionSpace space;
  space.bins = bins;
  for (std::size_t i : actionable) {
    if (i >= scm.num_endogenous())
      throw Error(ErrorCode::kUnknownTarget, "actionable index out of range");
    if (i == scm.protected_index())
      throw Error(ErrorCode::kInvalidArgument, "the protected attribute is not actionable");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& v : train) {
      lo = std::min(lo, v.values.at(i));
      hi = std::max(hi, v.values.at(i));
    }
    space.actionable.push_back(i);
    space.train_min.push_back(lo);
    space.train_max.push_back(hi);
  }
  return space;
}

std::size_t ActionGrid::ActionCount(std::optional<std::size_t> max_subset_size) const {
  // Sum over subset sizes k of C(m, k) * bins^k, plus the empty action.
  const std::size_t m = targets.size();
  const std::size_t kmax = std::min(m, max_subset_size.value_or(m));
  const std::size_t bins = values.empty() ? 0 : values.front().size();
  std::size_t total = 1;
  std::size_t choose = 1;
  std::size_t power = 1;
  for (std::size_t k = 1; k <= kmax; ++k) {
    choose = choose * (m - k + 1) / k;
    power *= bins;
    total += choose * power;
  }
  return total;
}

ActionGrid BuildGrid(const ActionSpace& space, std::span<const double> factual) {
  ActionGrid grid;
  grid.targets = space.actionable;
  const double intervals = static_cast<double>(space.bins - 1);
  for (std::size_t k = 0; k < space.actionable.size(); ++k) {
    const double x = factual[space.actionable[k]];
    double left = 2.0 * (x - space.train_min[k]);
    double right = 2.0 * (space.train_max[k] - x);
    if (left <= 0.0 && right <= 0.0) {
      left = right = 1.0;
      grid.widened = true;
    } else if (left <= 0.0) {
      left = right / intervals;
      grid.widened = true;
    } else if (right <= 0.0) {
      right = left / intervals;
      grid.widened = true;
    }
    const double lo = x - left;
    const double hi = x + right;
    std::vector<double> values(space.bins);
    const double step = (hi - lo) / intervals;
    for (int b = 0; b < space.bins; ++b) values[b] = lo + step * b;
    values.back() = hi;
    grid.values.push_back(std::move(values));
  }
  return grid;
}

namespace {

// Visits every non-empty action in enumeration order as (target positions,
// value indices). Return false to stop.
template <typename Visitor>
void ForEachNonEmptyAction(const ActionGrid& grid, std::optional<std::size_t> max_subset_size,
                           Visitor&& visit) {
  const std::size_t m = grid.targets.size();
  const std::size_t kmax = std::min(m, max_subset_size.value_or(m));
  std::vector<std::size_t> subset;
  std::vector<std::size_t> idx;
  for (std::size_t k = 1; k <= kmax; ++k) {
    subset.resize(k);
    for (std::size_t j = 0; j < k; ++j) subset[j] = j;
    while (true) {
      idx.assign(k, 0);
      while (true) {
        if (!visit(std::as_const(subset), std::as_const(idx))) return;
        std::size_t pos = k;
        while (pos > 0) {
          --pos;
          if (++idx[pos] < grid.values[subset[pos]].size()) break;
          idx[pos] = 0;
          if (pos == 0) {
            pos = k + 1;  // odometer wrapped
            break;
          }
        }
        if (pos == k + 1) break;
      }
      // Next k-combination of {0..m-1} in lexicographic order.
      std::size_t j = k;
      while (j > 0 && subset[j - 1] == m - k + (j - 1)) --j;
      if (j == 0) break;
      ++subset[j - 1];
      for (std::size_t t = j; t < k; ++t) subset[t] = subset[t - 1] + 1;
    }
  }
}

}  // namespace

void EnumerateActions(const ActionGrid& grid, std::optional<std::size_t> max_subset_size,
                      const std::function<bool(const Intervention&)>& visit) {
  if (!visit(Intervention{})) return;
  Intervention action;
  ForEachNonEmptyAction(grid, max_subset_size,
                        [&](const std::vector<std::size_t>& subset, const std::vector<std::size_t>& idx) {
                          action.assignments.clear();
                          for (std::size_t j = 0; j < subset.size(); ++j) {
                            action.assignments.emplace_back(grid.targets[subset[j]],
                                                            grid.values[subset[j]][idx[j]]);
                          }
                          return visit(action);
                        });
}

double ActionCost(CostKind kind, std::span<const double> factual, const Intervention& action,
                  std::span<const double> achieved) {
  double acc = 0.0;
  if (kind == CostKind::kL2Intervention) {
    for (const auto& [i, theta] : action.assignments) acc += (theta - factual[i]) * (theta - factual[i]);
  } else {
    for (std::size_t i = 0; i < factual.size(); ++i) acc += (achieved[i] - factual[i]) * (achieved[i] - factual[i]);
  }
  return std::sqrt(acc);
}

RecourseResult SolveRecourse(const RecourseQuery& query, const ClassifierModel& model,
                             const Scm* search_scm, const ActionSpace& space, CostKind cost_kind) {
  const std::span<const double> xf = query.factual;
  RecourseResult result;
  result.evaluations = 1;
  if (PredictFromValue(DecisionValue(model, xf, query.classifier_u)) == 1) {
    result.found = true;
    result.cost = 0.0;
    result.achieved.assign(xf.begin(), xf.end());
    return result;
  }
  const ActionGrid grid = BuildGrid(space, xf);
  result.widened_range = grid.widened;

  // Without propagation the endpoint distance equals the intervention distance,
  // so the cost is known before the counterfactual is computed.
  const bool cost_before_propagation = search_scm == nullptr || cost_kind == CostKind::kL2Intervention;
  std::vector<double> point(xf.begin(), xf.end());
  std::vector<std::pair<std::size_t, double>> fixed;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, double>> best_action;

  ForEachNonEmptyAction(grid, space.max_subset_size,
                        [&](const std::vector<std::size_t>& subset, const std::vector<std::size_t>& idx) {
    fixed.clear();
    double sq = 0.0;
    for (std::size_t j = 0; j < subset.size(); ++j) {
      const std::size_t target = grid.targets[subset[j]];
      const double theta = grid.values[subset[j]][idx[j]];
      fixed.emplace_back(target, theta);
      sq += (theta - xf[target]) * (theta - xf[target]);
    }
    double cost = std::sqrt(sq);
    if (cost_before_propagation && cost >= best) return true;
    if (search_scm == nullptr) {
      std::copy(xf.begin(), xf.end(), point.begin());
      for (const auto& [i, theta] : fixed) point[i] = theta;
    } else {
      PropagateCounterfactual(*search_scm, xf, query.search_u, fixed, point);
      if (!cost_before_propagation) {
        double acc = 0.0;
        for (std::size_t i = 0; i < xf.size(); ++i) acc += (point[i] - xf[i]) * (point[i] - xf[i]);
        cost = std::sqrt(acc);
        if (cost >= best) return true;
      }
    }
    ++result.evaluations;
    if (PredictFromValue(DecisionValue(model, point, query.classifier_u)) == 1) {
      best = cost;
      best_action = fixed;
      result.achieved = point;
    }
    return true;
  });

  if (!best_action.empty()) {
    result.found = true;
    result.cost = best;
    result.action.assignments = std::move(best_action);
  } else {
    result.achieved.clear();
  }
  return result;
}

namespace {

struct Prepared {
  ExogenousVector search_u;
  std::span<const double> classifier_u;
};

Prepared Prepare(const Instance& v, const ClassifierModel& model, const Scm* search_scm) {
  Prepared p;
  if (search_scm) p.search_u = Abduct(*search_scm, v);
  if (v.exogenous) {
    p.classifier_u = *v.exogenous;
  } else if (model.selector.reads_exogenous()) {
    if (!search_scm) throw Error(ErrorCode::kMissingVariable, "model reads exogenous inputs the instance lacks");
    p.classifier_u = p.search_u;
  }
  return p;
}

}  // namespace

RecourseResult SolveCausalRecourse(const Instance& v, const ClassifierModel& model,
                                   const Scm& search_scm, const ActionSpace& space, CostKind cost) {
  const Prepared p = Prepare(v, model, &search_scm);
  return SolveRecourse({v.values, p.search_u, p.classifier_u}, model, &search_scm, space, cost);
}

RecourseResult SolveImfRecourse(const Instance& v, const ClassifierModel& model,
                                const ActionSpace& space, CostKind cost) {
  const Prepared p = Prepare(v, model, nullptr);
  return SolveRecourse({v.values, {}, p.classifier_u}, model, nullptr, space, cost);
}

bool ValidateActionWith(const Intervention& action, std::span<const double> factual,
                        std::span<const double> oracle_u, std::span<const double> classifier_u,
                        const ClassifierModel& model, const Scm& oracle_scm,
                        std::span<const std::pair<std::size_t, double>> extra) {
  std::vector<std::pair<std::size_t, double>> fixed(action.assignments.begin(), action.assignments.end());
  fixed.insert(fixed.end(), extra.begin(), extra.end());
  std::sort(fixed.begin(), fixed.end());
  std::vector<double> point(factual.size());
  PropagateCounterfactual(oracle_scm, factual, oracle_u, fixed, point);
  return PredictFromValue(DecisionValue(model, point, classifier_u)) == 1;
}

bool ValidateAction(const RecourseResult& result, const Instance& v, const ClassifierModel& model,
                    const Scm& oracle_scm) {
  if (!result.found) return false;
  const ExogenousVector u = Abduct(oracle_scm, v);
  const std::span<const double> cu = v.exogenous ? std::span<const double>(*v.exogenous)
                                                 : std::span<const double>(u);
  return ValidateActionWith(result.action, v.values, u, cu, model, oracle_scm);
}

std::string FormatIntervention(const Scm& scm, const Intervention& action) {
  if (action.empty()) return "{}";
  std::string s;
  for (const auto& [i, theta] : action.assignments) {
    if (!s.empty()) s += ';';
    s += scm.variable(i).name + '=' + FormatDouble(theta);
  }
  return s;
}

}  // namespace fairrec
