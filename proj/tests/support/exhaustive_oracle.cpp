#include "exhaustive_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace fairrec::testing {

std::vector<double> OracleGrid(double x, double lo_data, double hi_data, int bins) {
  double left = 2.0 * (x - lo_data);
  double right = 2.0 * (hi_data - x);
  const double n = bins - 1;
  if (left <= 0.0 && right <= 0.0) {
    left = 1.0;
    right = 1.0;
  } else if (left <= 0.0) {
    left = right / n;
  } else if (right <= 0.0) {
    right = left / n;
  }
  const double lo = x - left;
  const double hi = x + right;
  std::vector<double> g;
  for (int b = 0; b < bins; ++b) g.push_back(b == bins - 1 ? hi : lo + (hi - lo) / n * b);
  return g;
}

namespace {

struct Candidate {
  std::vector<std::size_t> positions;  // into `actionable`
  std::vector<std::size_t> bins;
};

bool EnumerationLess(const Candidate& x, const Candidate& y) {
  if (x.positions.size() != y.positions.size()) return x.positions.size() < y.positions.size();
  return std::tie(x.positions, x.bins) < std::tie(y.positions, y.bins);
}

std::vector<double> Evaluate(const OracleProblem& p, const std::vector<std::pair<std::size_t, double>>& action) {
  std::vector<double> out = p.factual;
  if (p.scm == nullptr) {
    for (const auto& [i, v] : action) out[i] = v;
    return out;
  }
  const Scm& scm = *p.scm;
  const std::size_t n = scm.num_endogenous();
  std::vector<char> set(n, 0), moved(n, 0);
  for (const auto& [i, v] : action) {
    set[i] = 1;
    moved[i] = 1;
    out[i] = v;
  }
  // Sweep repeatedly until no value changes; the graph is acyclic so n passes suffice.
  for (std::size_t pass = 0; pass < n; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      if (set[i]) continue;
      const auto& eq = scm.equation(i);
      bool any = false;
      for (std::size_t q : eq.parents) any = any || moved[q];
      if (!any) continue;
      std::vector<double> pa;
      for (std::size_t q : eq.parents) pa.push_back(out[q]);
      const double noise = eq.noise ? p.u[*eq.noise] : 0.0;
      out[i] = EvaluateMechanism(eq.mechanism, pa, noise);
      moved[i] = 1;
    }
  }
  return out;
}

}  // namespace

OracleAnswer SolveExhaustively(const OracleProblem& p) {
  OracleAnswer answer;
  if (p.decision(p.factual) > 0.0) {
    answer.found = true;
    answer.achieved = p.factual;
    return answer;
  }
  const std::size_t m = p.actionable.size();
  std::vector<std::vector<double>> grids;
  for (std::size_t k = 0; k < m; ++k)
    grids.push_back(OracleGrid(p.factual[p.actionable[k]], p.lo_data[k], p.hi_data[k], p.bins));

  std::vector<Candidate> all;
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    Candidate c;
    for (std::size_t k = 0; k < m; ++k)
      if (mask >> k & 1) c.positions.push_back(k);
    std::size_t total = 1;
    for (std::size_t k = 0; k < c.positions.size(); ++k) total *= static_cast<std::size_t>(p.bins);
    for (std::size_t code = 0; code < total; ++code) {
      c.bins.assign(c.positions.size(), 0);
      std::size_t rest = code;
      for (std::size_t k = c.positions.size(); k-- > 0;) {
        c.bins[k] = rest % p.bins;
        rest /= p.bins;
      }
      all.push_back(c);
    }
  }
  std::sort(all.begin(), all.end(), EnumerationLess);

  for (const Candidate& c : all) {
    std::vector<std::pair<std::size_t, double>> action;
    for (std::size_t k = 0; k < c.positions.size(); ++k)
      action.emplace_back(p.actionable[c.positions[k]], grids[c.positions[k]][c.bins[k]]);
    const std::vector<double> x = Evaluate(p, action);
    if (!(p.decision(x) > 0.0)) continue;
    double sq = 0.0;
    if (p.endpoint_cost && p.scm != nullptr) {
      for (std::size_t i = 0; i < x.size(); ++i) sq += (x[i] - p.factual[i]) * (x[i] - p.factual[i]);
    } else {
      for (const auto& [i, v] : action) sq += (v - p.factual[i]) * (v - p.factual[i]);
    }
    const double cost = std::sqrt(sq);
    if (!answer.found || cost < answer.cost) {
      answer.found = true;
      answer.cost = cost;
      answer.action = action;
      answer.achieved = x;
    }
  }
  return answer;
}

}  // namespace fairrec::testing
