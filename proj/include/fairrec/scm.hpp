#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fairrec/rng.hpp"

namespace fairrec {

enum class VariableKind { kProtected, kFeature, kExogenous, kAuxiliary };

std::string_view VariableKindName(VariableKind kind);
VariableKind ParseVariableKind(std::string_view name);

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::kFeature;

  bool operator==(const Variable&) const = default;
};

// ---------------------------------------------------------------------------
// Exogenous noise

struct BernoulliNoise {
  double p = 0.5;
  bool operator==(const BernoulliNoise&) const = default;
};
struct GaussianNoise {
  double mean = 0.0;
  double variance = 1.0;
  bool operator==(const GaussianNoise&) const = default;
};
struct UniformNoise {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const UniformNoise&) const = default;
};
// Resampling of observed values; used for the roots of fitted SCMs.
struct EmpiricalNoise {
  std::vector<double> values;
  bool operator==(const EmpiricalNoise&) const = default;
};

using NoiseSpec = std::variant<BernoulliNoise, GaussianNoise, UniformNoise, EmpiricalNoise>;

// Throws kInvalidArgument when parameters are out of range.
void ValidateNoise(const NoiseSpec& noise);
double SampleNoise(const NoiseSpec& noise, const RandomBlock& block);

struct ExogenousSpec {
  std::string name;
  NoiseSpec noise;
  bool operator==(const ExogenousSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Mechanisms. Parent-indexed coefficients refer to positions in the
// equation's parent list.

// v := value. What an intervention turns an equation into.
struct ConstantMechanism {
  double value = 0.0;
  bool operator==(const ConstantMechanism&) const = default;
};

// v := (scale + sum_j scale_coeffs[j] pa_j) * u + (offset + sum_j offset_coeffs[j] pa_j)
// Covers A := 2U_A - 1, X := (2 - A) U_X and X := A U_X + (1 - A)(1 - U_X).
struct AffineInNoise {
  double scale = 1.0;
  std::vector<double> scale_coeffs;
  double offset = 0.0;
  std::vector<double> offset_coeffs;
  bool operator==(const AffineInNoise&) const = default;
};

struct PolynomialTerm {
  std::size_t parent = 0;
  double coeff = 0.0;
  int power = 1;
  bool operator==(const PolynomialTerm&) const = default;
};

// v := intercept + sum_t coeff_t * pa[parent_t]^power_t + u
struct AdditivePolynomial {
  double intercept = 0.0;
  std::vector<PolynomialTerm> terms;
  bool operator==(const AdditivePolynomial&) const = default;
};

// v := intercept + sum_j dual[j] * exp(-gamma * ||pa - c_j||^2) + u
// `centers` is column-major: centers[k * dual.size() + j] is coordinate k of c_j.
struct AdditiveKernelRidge {
  double intercept = 0.0;
  double gamma = 1.0;
  std::vector<double> centers;
  std::vector<double> dual;
  bool operator==(const AdditiveKernelRidge&) const = default;
};

// v := (gate + sum_j gate_coeffs[j] pa_j) * 1{u < threshold}
struct GatedIndicator {
  double threshold = 0.0;
  double gate = 1.0;
  std::vector<double> gate_coeffs;
  bool operator==(const GatedIndicator&) const = default;
};

// v := base(pa, u) + amount * pa[treatment_parent] * 1{u < threshold}
struct ThresholdSubsidy {
  AffineInNoise base;
  std::size_t treatment_parent = 0;
  double amount = 0.0;
  double threshold = 0.0;
  bool operator==(const ThresholdSubsidy&) const = default;
};

using Mechanism = std::variant<ConstantMechanism, AffineInNoise, AdditivePolynomial,
                               AdditiveKernelRidge, GatedIndicator, ThresholdSubsidy>;

enum class MechanismClass {
  kConstant,
  kRootAssignment,
  kAdditiveNoise,
  kInvertibleInNoise,
  kNonInvertible,
};

std::string_view MechanismClassName(MechanismClass cls);

double EvaluateMechanism(const Mechanism& mechanism, std::span<const double> parents, double noise);

// Noise value u with mechanism(parents, u) == value, or nullopt if the
// mechanism has no registered inverse (or is singular at this point).
std::optional<double> InvertMechanism(const Mechanism& mechanism, std::span<const double> parents,
                                      double value);

// ---------------------------------------------------------------------------

struct StructuralEquation {
  std::string child;
  std::vector<std::string> parents;
  std::string noise;  // empty for constant mechanisms
  Mechanism mechanism;
};

struct CausalGraph {
  std::vector<Variable> variables;
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::string> noise_names;
};

// Kahn's algorithm; among ready variables the earliest declared goes first.
// Throws kCycleDetected.
std::vector<std::size_t> TopologicalOrder(const CausalGraph& graph);

// Values of endogenous variables are stored in declaration order; exogenous
// vectors follow the SCM's exogenous declaration order.
using ExogenousVector = std::vector<double>;

struct Instance {
  std::vector<double> values;
  std::optional<ExogenousVector> exogenous;
  std::optional<int> label;  // -1 or +1

  bool operator==(const Instance&) const = default;
};

struct Intervention {
  // (endogenous index, value), sorted by index, unique.
  std::vector<std::pair<std::size_t, double>> assignments;

  bool empty() const { return assignments.empty(); }
  bool operator==(const Intervention&) const = default;
};

class Scm {
 public:
  struct Equation {
    std::vector<std::size_t> parents;
    std::optional<std::size_t> noise;
    Mechanism mechanism;
    MechanismClass cls = MechanismClass::kConstant;

    bool operator==(const Equation&) const = default;
  };

  // `protected_domain` may be left empty when it can be read off the protected
  // variable's root assignment (affine in Bernoulli or empirical noise).
  Scm(std::vector<Variable> endogenous, std::vector<ExogenousSpec> exogenous,
      std::vector<StructuralEquation> equations, std::vector<double> protected_domain = {},
      bool estimated = false);

  std::size_t num_endogenous() const { return variables_.size(); }
  std::size_t num_exogenous() const { return exogenous_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(std::size_t i) const { return variables_[i]; }
  const std::vector<ExogenousSpec>& exogenous() const { return exogenous_; }
  const ExogenousSpec& exogenous(std::size_t j) const { return exogenous_[j]; }
  const Equation& equation(std::size_t i) const { return equations_[i]; }
  const std::vector<Equation>& equations() const { return equations_; }
  const std::vector<std::size_t>& order() const { return order_; }
  std::size_t protected_index() const { return protected_index_; }
  const std::vector<double>& protected_domain() const { return protected_domain_; }
  bool estimated() const { return estimated_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;  // throws kUnknownVariable
  std::optional<std::size_t> find_exogenous(std::string_view name) const;

  // mask[j] is true iff j is reachable from i by a directed path. When
  // include_self is set, mask[i] is true as well.
  std::vector<bool> descendants(std::size_t i, bool include_self) const;

  // Indices of endogenous variables with kind == kFeature, in declaration order.
  std::vector<std::size_t> feature_indices() const;

  CausalGraph graph() const;

  // Equations in the name-based form accepted by the constructor.
  std::vector<StructuralEquation> named_equations() const;

  bool operator==(const Scm& other) const;

 private:
  std::vector<Variable> variables_;
  std::vector<ExogenousSpec> exogenous_;
  std::vector<Equation> equations_;
  std::vector<std::size_t> order_;
  std::vector<double> protected_domain_;
  std::size_t protected_index_ = 0;
  bool estimated_ = false;
};

// ---------------------------------------------------------------------------
// Operations. All are pure; stochastic ones take an explicit seed.

std::vector<std::string> TopologicalOrderNames(const Scm& scm);

// Draw i for exogenous variable `name` uses the random block at
// (seed, row = i, stream = StreamId(name)), so SCMs that share exogenous names
// share draws.
std::vector<ExogenousVector> SampleExogenous(const Scm& scm, std::size_t n, std::uint64_t seed);

Instance PushForward(const Scm& scm, const ExogenousVector& u);

ExogenousVector Abduct(const Scm& scm, const Instance& v);

Scm ApplyIntervention(const Scm& scm, const Intervention& intervention);

// Abduction, action, prediction. Variables that are not descendants of an
// intervention target keep their factual values bit for bit.
Instance Counterfactual(const Scm& scm, const Instance& v, const Intervention& intervention);

Instance CounterfactualTwin(const Scm& scm, const Instance& v, double protected_value);

// Counterfactual propagation from an already abducted noise vector. Entries of
// `fixed` (sorted by index) override their equations; every other variable is
// recomputed only if it descends from a fixed one and otherwise copied from
// `factual`. Writes all endogenous values to `out`.
void PropagateCounterfactual(const Scm& scm, std::span<const double> factual,
                             std::span<const double> u,
                             std::span<const std::pair<std::size_t, double>> fixed,
                             std::span<double> out);

// Builds an intervention from (name, value) pairs; throws kUnknownTarget.
Intervention MakeIntervention(const Scm& scm,
                              const std::vector<std::pair<std::string, double>>& assignments);

}  // namespace fairrec
