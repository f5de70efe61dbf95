#include "oracle_check.hpp"

#include <string>

#include "exhaustive_oracle.hpp"
#include "fairrec/classifiers.hpp"
#include "fairrec/io.hpp"
#include "fairrec/recourse.hpp"
#include "fairrec/rng.hpp"
#include "fairrec/worlds.hpp"

namespace fairrec::testing {

EquivalenceSummary CompareSolverWithOracle(std::uint64_t seed, std::size_t people_per_case) {
  EquivalenceSummary out;
  for (World world : {World::kImf, World::kCauLin, World::kCauAnm}) {
    const Scm scm = BuildWorld(world);
    const auto train = SampleInstances(scm, 200, seed + 11);
    const auto people = SampleInstances(scm, people_per_case, seed + 12);
    const ActionSpace space = ActionSpace::FromTraining(scm, train, scm.feature_indices(), 7);
    for (bool causal : {true, false}) {
      for (CostKind cost : {CostKind::kL2Intervention, CostKind::kL2Endpoint}) {
        CounterRng rng(seed + 77, StreamId("models"));
        for (std::size_t i = 0; i < people.size(); ++i) {
          ModelSpec spec;
          spec.family = Family::kFixedLinear;
          spec.selector = SelectorMode::kXOnly;
          for (std::size_t k = 0; k < scm.feature_indices().size(); ++k) spec.fixed_weights.push_back(rng.Gaussian());
          spec.fixed_bias = rng.Gaussian();
          const ClassifierModel h = Train(spec, scm, {}, 0);
          const Instance& v = people[i];
          const RecourseResult r =
              causal ? SolveCausalRecourse(v, h, scm, space, cost) : SolveImfRecourse(v, h, space, cost);
          OracleProblem p;
          p.factual = v.values;
          p.u = Abduct(scm, v);
          p.scm = causal ? &scm : nullptr;
          p.actionable = space.actionable;
          p.lo_data = space.train_min;
          p.hi_data = space.train_max;
          p.bins = 7;
          p.endpoint_cost = cost == CostKind::kL2Endpoint;
          p.decision = [&](std::span<const double> x) { return DecisionValue(h, x, {}); };
          const OracleAnswer o = SolveExhaustively(p);
          ++out.cases;
          const bool same = r.found == o.found &&
                            (!o.found || (r.cost == o.cost && r.action.assignments == o.action && r.achieved == o.achieved));
          if (!same) {
            ++out.mismatches;
            if (out.first_mismatch.empty())
              out.first_mismatch = std::string(WorldName(world)) + (causal ? " causal " : " imf ") +
                                   std::string(CostKindName(cost)) + " individual " + std::to_string(i);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace fairrec::testing
