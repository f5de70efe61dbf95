#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairrec/classifiers.hpp"
#include "fairrec/scm.hpp"

namespace fairrec {

enum class CostKind { kL2Intervention, kL2Endpoint };

std::string_view CostKindName(CostKind kind);
CostKind ParseCostKind(std::string_view name);

struct ActionSpace {
  std::vector<std::size_t> actionable;  // endogenous indices, ascending
  std::vector<double> train_min;        // parallel to `actionable`
  std::vector<double> train_max;
  int bins = 15;
  std::optional<std::size_t> max_subset_size;

  // Ranges from the training data's per-variable min and max. Throws
  // kInvalidArgument if a target is protected, out of range, or bins < 2.
  static ActionSpace FromTraining(const Scm& scm, const std::vector<Instance>& train,
                                  std::vector<std::size_t> actionable, int bins = 15);
};

// Per-variable intervention values for one factual point.
struct ActionGrid {
  std::vector<std::size_t> targets;
  std::vector<std::vector<double>> values;  // ascending, `bins` each
  bool widened = false;  // a zero-width side of some range was widened

  std::size_t ActionCount(std::optional<std::size_t> max_subset_size) const;
};

// bins equally spaced values over [xF - 2(xF - min), xF + 2(max - xF)]. A
// zero-width side is widened by one grid step of the other side; if both are
// zero the range becomes [xF - 1, xF + 1].
ActionGrid BuildGrid(const ActionSpace& space, std::span<const double> factual);

// The empty action first, then every non-empty subset of targets (by size,
// then lexicographically by position) with values in ascending odometer order
// (last target varies fastest). Return false from `visit` to stop.
void EnumerateActions(const ActionGrid& grid, std::optional<std::size_t> max_subset_size,
                      const std::function<bool(const Intervention&)>& visit);

struct RecourseResult {
  bool found = false;
  Intervention action;
  double cost = std::numeric_limits<double>::infinity();
  std::vector<double> achieved;  // endogenous values after the action
  std::size_t evaluations = 0;   // classifier calls made
  bool widened_range = false;
  std::optional<bool> valid_under_oracle;
};

// One search. `search_scm` == nullptr means independently manipulable
// features (IMF): targets change, nothing else does. Otherwise the action is
// propagated through `search_scm` holding `search_u` fixed. The classifier's
// exogenous inputs are `classifier_u` throughout.
struct RecourseQuery {
  std::span<const double> factual;
  std::span<const double> search_u;
  std::span<const double> classifier_u;
};

RecourseResult SolveRecourse(const RecourseQuery& query, const ClassifierModel& model,
                             const Scm* search_scm, const ActionSpace& space, CostKind cost);

// Convenience forms. Exogenous classifier inputs come from v.exogenous when
// present, otherwise from abduction under the search SCM.
RecourseResult SolveCausalRecourse(const Instance& v, const ClassifierModel& model,
                                   const Scm& search_scm, const ActionSpace& space,
                                   CostKind cost = CostKind::kL2Intervention);
RecourseResult SolveImfRecourse(const Instance& v, const ClassifierModel& model,
                                const ActionSpace& space, CostKind cost = CostKind::kL2Endpoint);

double ActionCost(CostKind kind, std::span<const double> factual, const Intervention& action,
                  std::span<const double> achieved);

// Recomputes the action's counterfactual under `oracle_scm` and checks the
// classifier outputs +1. Results without an action are valid when the empty
// action was chosen (already positive) and invalid otherwise.
bool ValidateAction(const RecourseResult& result, const Instance& v, const ClassifierModel& model,
                    const Scm& oracle_scm);

// Same, with explicit factual values, oracle noise and classifier inputs; `extra`
// assignments (e.g. do(A := a')) are applied together with the action.
bool ValidateActionWith(const Intervention& action, std::span<const double> factual,
                        std::span<const double> oracle_u, std::span<const double> classifier_u,
                        const ClassifierModel& model, const Scm& oracle_scm,
                        std::span<const std::pair<std::size_t, double>> extra = {});

std::string FormatIntervention(const Scm& scm, const Intervention& action);

}  // namespace fairrec
