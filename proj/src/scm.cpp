#include "fairrec/scm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>

#include "fairrec/error.hpp"
#include "fairrec/simd/kernels.hpp"

namespace fairrec {

std::string_view VariableKindName(VariableKind kind) {
  switch (kind) {
    case VariableKind::kProtected: return "protected";
    case VariableKind::kFeature: return "feature";
    case VariableKind::kExogenous: return "exogenous";
    case VariableKind::kAuxiliary: return "auxiliary";
  }
  return "?";
}

VariableKind ParseVariableKind(std::string_view name) {
  if (name == "protected") return VariableKind::kProtected;
  if (name == "feature") return VariableKind::kFeature;
  if (name == "exogenous") return VariableKind::kExogenous;
  if (name == "auxiliary") return VariableKind::kAuxiliary;
  throw Error(ErrorCode::kParseError, "unknown variable kind '" + std::string(name) + "'");
}

std::string_view MechanismClassName(MechanismClass cls) {
  switch (cls) {
    case MechanismClass::kConstant: return "constant";
    case MechanismClass::kRootAssignment: return "root-assignment";
    case MechanismClass::kAdditiveNoise: return "additive-noise";
    case MechanismClass::kInvertibleInNoise: return "general-invertible-in-noise";
    case MechanismClass::kNonInvertible: return "non-invertible";
  }
  return "?";
}

// ---------------------------------------------------------------------------

void ValidateNoise(const NoiseSpec& noise) {
  std::visit(
      [](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BernoulliNoise>) {
          if (!(n.p >= 0.0 && n.p <= 1.0))
            throw Error(ErrorCode::kInvalidArgument, "Bernoulli p must lie in [0, 1]");
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          if (!(n.variance > 0.0) || !std::isfinite(n.mean))
            throw Error(ErrorCode::kInvalidArgument, "Gaussian variance must be positive");
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          if (!(n.lo < n.hi)) throw Error(ErrorCode::kInvalidArgument, "Uniform needs lo < hi");
        } else {
          if (n.values.empty())
            throw Error(ErrorCode::kInvalidArgument, "empirical noise needs at least one value");
        }
      },
      noise);
}

double SampleNoise(const NoiseSpec& noise, const RandomBlock& block) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BernoulliNoise>) {
          return block.Uniform() < n.p ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, GaussianNoise>) {
          return n.mean + std::sqrt(n.variance) * block.Gaussian();
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          return n.lo + (n.hi - n.lo) * block.Uniform();
        } else {
          const auto k = static_cast<std::size_t>(block.Uniform() * static_cast<double>(n.values.size()));
          return n.values[std::min(k, n.values.size() - 1)];
        }
      },
      noise);
}

// ---------------------------------------------------------------------------

namespace {

double AffineCombination(double constant, const std::vector<double>& coeffs,
                         std::span<const double> parents) {
  double acc = constant;
  for (std::size_t j = 0; j < coeffs.size(); ++j) acc += coeffs[j] * parents[j];
  return acc;
}

double IntegerPower(double x, int power) {
  double r = 1.0;
  for (int k = 0; k < power; ++k) r *= x;
  return r;
}

double PolynomialPart(const AdditivePolynomial& m, std::span<const double> parents) {
  double acc = m.intercept;
  for (const auto& term : m.terms) acc += term.coeff * IntegerPower(parents[term.parent], term.power);
  return acc;
}

double KernelRidgePart(const AdditiveKernelRidge& m, std::span<const double> parents) {
  if (m.dual.empty()) return m.intercept;
  return m.intercept + simd::Active().rbf_weighted_sum(parents.data(), m.centers.data(),
                                                      m.dual.data(), m.dual.size(),
                                                      parents.size(), m.gamma);
}

}  // namespace

double EvaluateMechanism(const Mechanism& mechanism, std::span<const double> parents, double u) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantMechanism>) {
          return m.value;
        } else if constexpr (std::is_same_v<T, AffineInNoise>) {
          return AffineCombination(m.scale, m.scale_coeffs, parents) * u +
                 AffineCombination(m.offset, m.offset_coeffs, parents);
        } else if constexpr (std::is_same_v<T, AdditivePolynomial>) {
          return PolynomialPart(m, parents) + u;
        } else if constexpr (std::is_same_v<T, AdditiveKernelRidge>) {
          return KernelRidgePart(m, parents) + u;
        } else if constexpr (std::is_same_v<T, GatedIndicator>) {
          return u < m.threshold ? AffineCombination(m.gate, m.gate_coeffs, parents) : 0.0;
        } else {
          const double base = AffineCombination(m.base.scale, m.base.scale_coeffs, parents) * u +
                              AffineCombination(m.base.offset, m.base.offset_coeffs, parents);
          return base + (u < m.threshold ? m.amount * parents[m.treatment_parent] : 0.0);
        }
      },
      mechanism);
}

std::optional<double> InvertMechanism(const Mechanism& mechanism, std::span<const double> parents,
                                      double value) {
  return std::visit(
      [&](const auto& m) -> std::optional<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineInNoise>) {
          const double scale = AffineCombination(m.scale, m.scale_coeffs, parents);
          if (scale == 0.0) return std::nullopt;
          return (value - AffineCombination(m.offset, m.offset_coeffs, parents)) / scale;
        } else if constexpr (std::is_same_v<T, AdditivePolynomial>) {
          return value - PolynomialPart(m, parents);
        } else if constexpr (std::is_same_v<T, AdditiveKernelRidge>) {
          return value - KernelRidgePart(m, parents);
        } else {
          return std::nullopt;
        }
      },
      mechanism);
}

namespace {

MechanismClass Classify(const Mechanism& mechanism, std::size_t num_parents) {
  return std::visit(
      [&](const auto& m) -> MechanismClass {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantMechanism>) {
          return MechanismClass::kConstant;
        } else if constexpr (std::is_same_v<T, AffineInNoise>) {
          if (num_parents == 0) return MechanismClass::kRootAssignment;
          const bool unit_scale = m.scale == 1.0 && std::all_of(m.scale_coeffs.begin(),
                                                                m.scale_coeffs.end(),
                                                                [](double c) { return c == 0.0; });
          return unit_scale ? MechanismClass::kAdditiveNoise : MechanismClass::kInvertibleInNoise;
        } else if constexpr (std::is_same_v<T, AdditivePolynomial> ||
                             std::is_same_v<T, AdditiveKernelRidge>) {
          return MechanismClass::kAdditiveNoise;
        } else {
          return MechanismClass::kNonInvertible;
        }
      },
      mechanism);
}

void CheckCoefficients(const std::vector<double>& coeffs, std::size_t num_parents,
                       const std::string& child) {
  if (!coeffs.empty() && coeffs.size() != num_parents) {
    throw Error(ErrorCode::kInvalidArgument,
                "coefficient count does not match parent count in equation for " + child);
  }
}

void ValidateMechanism(const Mechanism& mechanism, std::size_t num_parents,
                       const std::string& child) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineInNoise>) {
          CheckCoefficients(m.scale_coeffs, num_parents, child);
          CheckCoefficients(m.offset_coeffs, num_parents, child);
        } else if constexpr (std::is_same_v<T, AdditivePolynomial>) {
          for (const auto& t : m.terms) {
            if (t.parent >= num_parents || t.power < 0)
              throw Error(ErrorCode::kInvalidArgument, "bad polynomial term in equation for " + child);
          }
        } else if constexpr (std::is_same_v<T, AdditiveKernelRidge>) {
          if (m.centers.size() != m.dual.size() * num_parents || !(m.gamma > 0.0))
            throw Error(ErrorCode::kInvalidArgument, "bad kernel ridge payload for " + child);
        } else if constexpr (std::is_same_v<T, GatedIndicator>) {
          CheckCoefficients(m.gate_coeffs, num_parents, child);
        } else if constexpr (std::is_same_v<T, ThresholdSubsidy>) {
          CheckCoefficients(m.base.scale_coeffs, num_parents, child);
          CheckCoefficients(m.base.offset_coeffs, num_parents, child);
          if (m.treatment_parent >= num_parents)
            throw Error(ErrorCode::kInvalidArgument, "bad treatment parent for " + child);
        }
      },
      mechanism);
}

std::vector<double> InferProtectedDomain(const Scm::Equation& eq, const ExogenousSpec* noise) {
  const auto* affine = std::get_if<AffineInNoise>(&eq.mechanism);
  if (affine == nullptr || !eq.parents.empty() || noise == nullptr) return {};
  std::set<double> values;
  if (std::holds_alternative<BernoulliNoise>(noise->noise)) {
    values = {affine->offset, affine->offset + affine->scale};
  } else if (const auto* emp = std::get_if<EmpiricalNoise>(&noise->noise)) {
    for (double v : emp->values) values.insert(affine->offset + affine->scale * v);
  }
  return {values.begin(), values.end()};
}

// Small parent buffer on the stack for the common case.
template <typename F>
double WithParents(const Scm::Equation& eq, std::span<const double> values, F&& f) {
  constexpr std::size_t kInline = 16;
  if (eq.parents.size() <= kInline) {
    std::array<double, kInline> buf;
    for (std::size_t j = 0; j < eq.parents.size(); ++j) buf[j] = values[eq.parents[j]];
    return f(std::span<const double>(buf.data(), eq.parents.size()));
  }
  std::vector<double> buf(eq.parents.size());
  for (std::size_t j = 0; j < eq.parents.size(); ++j) buf[j] = values[eq.parents[j]];
  return f(std::span<const double>(buf));
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::size_t> TopologicalOrder(const CausalGraph& graph) {
  const std::size_t n = graph.variables.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p : graph.parents[i]) {
      children[p].push_back(i);
      ++indegree[i];
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t c : children[i])
      if (--indegree[c] == 0) ready.push(c);
  }
  if (order.size() != n) {
    std::string members;
    for (std::size_t i = 0; i < n; ++i) {
      if (indegree[i] > 0) members += (members.empty() ? "" : ", ") + graph.variables[i].name;
    }
    throw Error(ErrorCode::kCycleDetected, "variables on or behind a cycle: " + members);
  }
  return order;
}

Scm::Scm(std::vector<Variable> endogenous, std::vector<ExogenousSpec> exogenous,
         std::vector<StructuralEquation> equations, std::vector<double> protected_domain,
         bool estimated)
    : variables_(std::move(endogenous)),
      exogenous_(std::move(exogenous)),
      protected_domain_(std::move(protected_domain)),
      estimated_(estimated) {
  std::unordered_map<std::string, std::size_t> endo_index;
  std::unordered_map<std::string, std::size_t> exo_index;
  std::optional<std::size_t> protected_index;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& v = variables_[i];
    if (v.kind == VariableKind::kExogenous)
      throw Error(ErrorCode::kInvalidArgument, "exogenous variable listed as endogenous: " + v.name);
    if (!endo_index.emplace(v.name, i).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate variable name: " + v.name);
    if (v.kind == VariableKind::kProtected) {
      if (protected_index)
        throw Error(ErrorCode::kInvalidArgument, "more than one protected variable");
      protected_index = i;
    }
  }
  if (!protected_index) throw Error(ErrorCode::kInvalidArgument, "no protected variable declared");
  protected_index_ = *protected_index;
  for (std::size_t j = 0; j < exogenous_.size(); ++j) {
    ValidateNoise(exogenous_[j].noise);
    if (endo_index.contains(exogenous_[j].name) || !exo_index.emplace(exogenous_[j].name, j).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate variable name: " + exogenous_[j].name);
  }

  equations_.resize(variables_.size());
  std::vector<bool> seen(variables_.size(), false);
  for (auto& eq : equations) {
    const auto child_it = endo_index.find(eq.child);
    if (child_it == endo_index.end())
      throw Error(ErrorCode::kUnknownVariable, "equation for undeclared variable " + eq.child);
    const std::size_t child = child_it->second;
    if (seen[child]) throw Error(ErrorCode::kInvalidArgument, "two equations for " + eq.child);
    seen[child] = true;
    Equation resolved;
    for (const auto& p : eq.parents) {
      const auto it = endo_index.find(p);
      if (it == endo_index.end())
        throw Error(ErrorCode::kUnknownVariable, "undeclared parent " + p + " of " + eq.child);
      if (it->second == child)
        throw Error(ErrorCode::kCycleDetected, eq.child + " lists itself as a parent");
      resolved.parents.push_back(it->second);
    }
    ValidateMechanism(eq.mechanism, resolved.parents.size(), eq.child);
    resolved.cls = Classify(eq.mechanism, resolved.parents.size());
    if (resolved.cls != MechanismClass::kConstant) {
      const auto it = exo_index.find(eq.noise);
      if (it == exo_index.end())
        throw Error(ErrorCode::kMissingNoise, "equation for " + eq.child + " names no declared noise");
      resolved.noise = it->second;
    }
    resolved.mechanism = std::move(eq.mechanism);
    equations_[child] = std::move(resolved);
  }
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (!seen[i]) throw Error(ErrorCode::kInvalidArgument, "no equation for " + variables_[i].name);
  }

  order_ = TopologicalOrder(graph());

  if (protected_domain_.empty()) {
    const auto& eq = equations_[protected_index_];
    protected_domain_ = InferProtectedDomain(eq, eq.noise ? &exogenous_[*eq.noise] : nullptr);
    if (const auto* c = std::get_if<ConstantMechanism>(&eq.mechanism)) protected_domain_ = {c->value};
    if (protected_domain_.empty())
      throw Error(ErrorCode::kInvalidArgument,
                  "protected domain cannot be inferred; pass it explicitly");
  }
}

std::optional<std::size_t> Scm::find(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Scm::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorCode::kUnknownVariable, "no endogenous variable named " + std::string(name));
}

std::optional<std::size_t> Scm::find_exogenous(std::string_view name) const {
  for (std::size_t j = 0; j < exogenous_.size(); ++j)
    if (exogenous_[j].name == name) return j;
  return std::nullopt;
}

std::vector<bool> Scm::descendants(std::size_t i, bool include_self) const {
  std::vector<bool> mask(variables_.size(), false);
  mask[i] = true;
  // order_ is topological, so one forward sweep reaches every descendant.
  for (std::size_t k : order_) {
    if (mask[k]) continue;
    for (std::size_t p : equations_[k].parents) {
      if (mask[p]) {
        mask[k] = true;
        break;
      }
    }
  }
  mask[i] = include_self;
  return mask;
}

std::vector<std::size_t> Scm::feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].kind == VariableKind::kFeature) out.push_back(i);
  return out;
}

CausalGraph Scm::graph() const {
  CausalGraph g;
  g.variables = variables_;
  for (const auto& eq : equations_) {
    g.parents.push_back(eq.parents);
    g.noise_names.push_back(eq.noise ? exogenous_[*eq.noise].name : std::string());
  }
  return g;
}

std::vector<StructuralEquation> Scm::named_equations() const {
  std::vector<StructuralEquation> out;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& eq = equations_[i];
    StructuralEquation se;
    se.child = variables_[i].name;
    for (std::size_t p : eq.parents) se.parents.push_back(variables_[p].name);
    if (eq.noise) se.noise = exogenous_[*eq.noise].name;
    se.mechanism = eq.mechanism;
    out.push_back(std::move(se));
  }
  return out;
}

bool Scm::operator==(const Scm& other) const {
  return variables_ == other.variables_ && exogenous_ == other.exogenous_ &&
         equations_ == other.equations_ && protected_domain_ == other.protected_domain_ &&
         estimated_ == other.estimated_;
}

// ---------------------------------------------------------------------------

std::vector<std::string> TopologicalOrderNames(const Scm& scm) {
  std::vector<std::string> names;
  for (std::size_t i : scm.order()) names.push_back(scm.variable(i).name);
  return names;
}

std::vector<ExogenousVector> SampleExogenous(const Scm& scm, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sample size must be at least 1");
  std::vector<std::uint32_t> streams;
  for (const auto& e : scm.exogenous()) streams.push_back(StreamId(e.name));
  std::vector<ExogenousVector> out(n, ExogenousVector(scm.num_exogenous()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < scm.num_exogenous(); ++j) {
      out[i][j] = SampleNoise(scm.exogenous(j).noise, RandomBlock::At(seed, i, streams[j]));
    }
  }
  return out;
}

Instance PushForward(const Scm& scm, const ExogenousVector& u) {
  if (u.size() != scm.num_exogenous()) {
    throw Error(ErrorCode::kMissingNoise, "exogenous vector has " + std::to_string(u.size()) +
                                              " entries, SCM declares " +
                                              std::to_string(scm.num_exogenous()));
  }
  Instance v;
  v.values.assign(scm.num_endogenous(), 0.0);
  for (std::size_t i : scm.order()) {
    const auto& eq = scm.equation(i);
    const double noise = eq.noise ? u[*eq.noise] : 0.0;
    v.values[i] = WithParents(eq, v.values, [&](std::span<const double> pa) {
      return EvaluateMechanism(eq.mechanism, pa, noise);
    });
  }
  v.exogenous = u;
  return v;
}

ExogenousVector Abduct(const Scm& scm, const Instance& v) {
  if (v.values.size() != scm.num_endogenous())
    throw Error(ErrorCode::kMissingVariable, "instance does not cover the SCM's variables");
  // Noise of constant (intervened) equations is not identifiable; it stays 0.
  ExogenousVector u(scm.num_exogenous(), 0.0);
  for (std::size_t i : scm.order()) {
    const auto& eq = scm.equation(i);
    if (!eq.noise) continue;
    std::optional<double> inverted;
    WithParents(eq, v.values, [&](std::span<const double> pa) {
      inverted = InvertMechanism(eq.mechanism, pa, v.values[i]);
      return 0.0;
    });
    if (!inverted) {
      throw Error(ErrorCode::kNotInvertible,
                  "mechanism of " + scm.variable(i).name + " (" +
                      std::string(MechanismClassName(eq.cls)) + ") has no inverse here");
    }
    u[*eq.noise] = *inverted;
  }
  return u;
}

Intervention MakeIntervention(const Scm& scm,
                              const std::vector<std::pair<std::string, double>>& assignments) {
  Intervention out;
  for (const auto& [name, value] : assignments) {
    const auto i = scm.find(name);
    if (!i) throw Error(ErrorCode::kUnknownTarget, "intervention target " + name + " is not endogenous");
    out.assignments.emplace_back(*i, value);
  }
  std::sort(out.assignments.begin(), out.assignments.end());
  for (std::size_t k = 1; k < out.assignments.size(); ++k) {
    if (out.assignments[k].first == out.assignments[k - 1].first)
      throw Error(ErrorCode::kInvalidArgument, "intervention assigns a variable twice");
  }
  return out;
}

Scm ApplyIntervention(const Scm& scm, const Intervention& intervention) {
  auto equations = scm.named_equations();
  for (const auto& [index, value] : intervention.assignments) {
    if (index >= scm.num_endogenous())
      throw Error(ErrorCode::kUnknownTarget, "intervention target index out of range");
    auto& eq = equations[index];
    eq.parents.clear();
    eq.noise.clear();
    eq.mechanism = ConstantMechanism{value};
  }
  return Scm(scm.variables(), scm.exogenous(), std::move(equations), scm.protected_domain(),
             scm.estimated());
}

void PropagateCounterfactual(const Scm& scm, std::span<const double> factual,
                             std::span<const double> u,
                             std::span<const std::pair<std::size_t, double>> fixed,
                             std::span<double> out) {
  const std::size_t n = scm.num_endogenous();
  constexpr std::size_t kInline = 64;
  std::array<bool, kInline> changed_inline{};
  std::vector<bool> changed_heap;
  const bool small = n <= kInline;
  if (!small) changed_heap.assign(n, false);
  auto changed = [&](std::size_t i) -> bool { return small ? changed_inline[i] : changed_heap[i]; };
  auto mark = [&](std::size_t i) {
    if (small) changed_inline[i] = true; else changed_heap[i] = true;
  };

  for (std::size_t i : scm.order()) {
    const auto hit = std::find_if(fixed.begin(), fixed.end(),
                                  [i](const auto& a) { return a.first == i; });
    if (hit != fixed.end()) {
      out[i] = hit->second;
      mark(i);
      continue;
    }
    const auto& eq = scm.equation(i);
    const bool affected = std::any_of(eq.parents.begin(), eq.parents.end(),
                                      [&](std::size_t p) { return changed(p); });
    if (!affected) {
      out[i] = factual[i];
      continue;
    }
    const double noise = eq.noise ? u[*eq.noise] : 0.0;
    out[i] = WithParents(eq, std::span<const double>(out.data(), out.size()),
                         [&](std::span<const double> pa) {
                           return EvaluateMechanism(eq.mechanism, pa, noise);
                         });
    mark(i);
  }
}

Instance Counterfactual(const Scm& scm, const Instance& v, const Intervention& intervention) {
  for (const auto& [index, value] : intervention.assignments) {
    if (index >= scm.num_endogenous())
      throw Error(ErrorCode::kUnknownTarget, "intervention target index out of range");
  }
  const ExogenousVector u = Abduct(scm, v);
  Instance out;
  out.values.assign(scm.num_endogenous(), 0.0);
  PropagateCounterfactual(scm, v.values, u, intervention.assignments, out.values);
  out.exogenous = u;
  return out;
}

Instance CounterfactualTwin(const Scm& scm, const Instance& v, double protected_value) {
  const auto& domain = scm.protected_domain();
  if (std::find(domain.begin(), domain.end(), protected_value) == domain.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "protected value " + std::to_string(protected_value) + " outside the domain");
  }
  Intervention twin;
  twin.assignments.emplace_back(scm.protected_index(), protected_value);
  return Counterfactual(scm, v, twin);
}

}  // namespace fairrec
