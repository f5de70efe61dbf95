#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairrec/scm.hpp"

namespace fairrec {

enum class SelectorMode { kXAndA, kXOnly, kNondescendants, kNondescendantsPlusExogenous };

std::string_view SelectorModeName(SelectorMode mode);
SelectorMode ParseSelectorMode(std::string_view name);

// Which coordinates a classifier reads. Endogenous inputs come first (SCM
// declaration order), then exogenous inputs (SCM exogenous order).
//
// "Descendants of A" includes A itself, so kNondescendants drops A, and
// kNondescendantsPlusExogenous adds the noise of A and of every descendant.
struct FeatureSelector {
  SelectorMode mode = SelectorMode::kXAndA;
  std::vector<std::size_t> endogenous;
  std::vector<std::size_t> exogenous;
  std::vector<std::string> names;

  static FeatureSelector Resolve(SelectorMode mode, const Scm& scm);

  std::size_t dim() const { return endogenous.size() + exogenous.size(); }
  bool reads_exogenous() const { return !exogenous.empty(); }

  // Throws kMissingVariable when a coordinate is out of range.
  void Extract(std::span<const double> values, std::span<const double> u, double* out) const;
};

enum class Family { kLogisticLinear, kLogisticMlp, kSvm, kFairSvm, kFixedLinear };

std::string_view FamilyName(Family family);
Family ParseFamily(std::string_view name);

enum class MlpOptimizer { kGradientDescent, kAdam };

struct ModelSpec {
  std::string label;  // display name, e.g. "LR(X,A)"
  Family family = Family::kLogisticLinear;
  SelectorMode selector = SelectorMode::kXAndA;
  int degree = 1;        // svm / fair-svm: explicit polynomial map, 1..3
  double C = 1.0;        // svm / fair-svm
  double lambda = 0.0;   // fair-svm
  std::vector<int> hidden = {10, 10};
  MlpOptimizer mlp_optimizer = MlpOptimizer::kGradientDescent;
  double learning_rate = 0.01;  // mlp
  int epochs = 2000;            // mlp (full batch)
  int svm_iterations = 4000;
  // kFixedLinear: decision = fixed_weights . inputs + fixed_bias, no training.
  std::vector<double> fixed_weights;
  double fixed_bias = 0.0;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // row-major out x in
  std::vector<double> bias;
};

struct ClassifierModel {
  ModelSpec spec;
  FeatureSelector selector;
  // Linear-in-feature-map families: f(x) = w . phi(x) + b.
  std::vector<double> w;
  double b = 0.0;
  // MLP: ReLU hidden layers, linear output unit (the logit).
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return selector.dim(); }
  std::string FeatureMapDescription() const;
};

// All monomials of total degree 1..degree over `x`, graded then lexicographic
// by variable index. degree 1 is the identity.
std::size_t PolynomialFeatureCount(std::size_t dim, int degree);
void PolynomialFeatures(std::span<const double> x, int degree, double* out);

// Design matrix for training: rows of selector inputs.
struct LabeledMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> x;  // row-major
  std::vector<double> y;  // +-1
  std::vector<double> group;  // protected value per row
};

// Exogenous inputs come from each instance's recorded exogenous vector when
// present, otherwise from abduction under `scm`.
LabeledMatrix BuildMatrix(const FeatureSelector& selector, const Scm& scm,
                          const std::vector<Instance>& data);

// Throws kDegenerateData (one class, or fewer than 20 rows), kNonConvergence.
ClassifierModel Train(const ModelSpec& spec, const Scm& scm, const std::vector<Instance>& data,
                      std::uint64_t seed);
ClassifierModel TrainOnMatrix(const ModelSpec& spec, const FeatureSelector& selector,
                              const LabeledMatrix& m, std::uint64_t seed);

double DecisionValueFromInputs(const ClassifierModel& model, std::span<const double> inputs);
double DecisionValue(const ClassifierModel& model, std::span<const double> values,
                     std::span<const double> exogenous);
// Uses v.exogenous for exogenous inputs; throws kMissingVariable if needed and absent.
double DecisionValue(const ClassifierModel& model, const Instance& v);
inline int PredictFromValue(double f) { return f > 0.0 ? 1 : -1; }
int Predict(const ClassifierModel& model, const Instance& v);

// |f(x)| / ||w|| for families that are affine in their feature map.
std::optional<double> MarginDistance(const ClassifierModel& model, std::span<const double> inputs);

double Accuracy(const ClassifierModel& model, const LabeledMatrix& m);

enum class CvScore {
  kAccuracy,
  // Validation accuracy minus the validation gap in mean distance to the
  // boundary between groups (affine models only); used to pick FairSVM's lambda.
  kAccuracyMinusDistanceGap,
  // Smallest validation gap alone; ties go to the earliest spec.
  kDistanceGap,
};

std::string_view CvScoreName(CvScore score);
CvScore ParseCvScore(std::string_view name);  // throws kParseError

struct CrossValidationResult {
  std::size_t best = 0;
  std::vector<std::vector<double>> fold_accuracy;  // [spec][fold]
  std::vector<double> mean_accuracy;
  std::vector<double> mean_gap;  // gap-based scores only
  std::vector<double> mean_score;
};

// Seeded fold assignment; ties go to the earliest spec.
CrossValidationResult CrossValidate(const std::vector<ModelSpec>& specs, const Scm& scm,
                                    const std::vector<Instance>& data, int folds,
                                    std::uint64_t seed, CvScore score = CvScore::kAccuracy);

// Gap between group means of the distance to the boundary |f|/||w|| among rows
// the model classifies negative. Zero for models without an affine decision.
double DistanceGapOn(const ClassifierModel& model, const LabeledMatrix& m);

struct CounterfactualFairness {
  bool fair = true;
  std::size_t violations = 0;  // instances whose prediction changes for some twin
};

CounterfactualFairness CheckCounterfactualFairness(const ClassifierModel& model, const Scm& scm,
                                                   const std::vector<Instance>& data);

// Objectives and analytic gradients, exposed for finite-difference checks.
// Parameters are packed as (w..., b).
namespace objective {

double LogLoss(std::span<const double> params, const LabeledMatrix& m, std::vector<double>* grad);
double Hinge(std::span<const double> params, const LabeledMatrix& m, double C,
             std::vector<double>* grad);
// Hinge objective plus lambda * |mean distance gap| between the first two
// groups among currently negative rows.
double FairHinge(std::span<const double> params, const LabeledMatrix& m, double C, double lambda,
                 std::vector<double>* grad);
// Mean distance gap term alone (unscaled), for monitoring.
double DistanceGap(std::span<const double> params, const LabeledMatrix& m);
// MLP mean log-loss with parameters flattened layer by layer (weights, then bias).
double MlpLogLoss(std::span<const double> params, const std::vector<DenseLayer>& shape,
                  const LabeledMatrix& m, std::vector<double>* grad);

}  // namespace objective

std::string SerializeModel(const ClassifierModel& model);
ClassifierModel ParseModel(std::string_view text);
void SaveModel(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel LoadModel(const std::filesystem::path& path);

}  // namespace fairrec
