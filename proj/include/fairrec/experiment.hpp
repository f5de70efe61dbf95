#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairrec/classifiers.hpp"
#include "fairrec/metrics.hpp"
#include "fairrec/recourse.hpp"
#include "fairrec/worlds.hpp"

namespace fairrec {

enum class RecourseScmKind { kOracle, kFittedLinear, kFittedKernelRidge };

std::string_view RecourseScmName(RecourseScmKind kind);
RecourseScmKind ParseRecourseScm(std::string_view name);  // throws kParseError

// Every knob of a run. Keys, defaults and meaning are listed by ConfigSchema();
// `out` and `workers` do not affect results and are left out of the hash.
struct ExperimentConfig {
  World world = World::kImf;
  LabelModel labels;
  std::size_t n_train = 500;
  std::size_t n_test = 3000;
  std::vector<std::uint64_t> seeds = {0};
  std::vector<std::string> classifiers = {"LR(X,A)",  "LR(X)",  "LR(X_nd)",  "LR(X_nd,U_d)",
                                          "SVM(X,A)", "SVM(X)", "SVM(X_nd)", "SVM(X_nd,U_d)",
                                          "FairSVM(X,A)"};
  std::vector<RecourseScmKind> recourse_scm = {RecourseScmKind::kOracle};

  int bins = 15;
  std::optional<std::size_t> max_subset_size;  // unset: all subsets
  CostKind causal_cost = CostKind::kL2Intervention;
  CostKind imf_cost = CostKind::kL2Endpoint;
  std::optional<std::size_t> negatives_per_group = 50;  // unset: every negative
  std::string table_delta_dist = "margin";              // "margin" or "grid"

  int cv_folds = 5;
  std::optional<Family> lr_family;  // unset: MLP for nonlinear labels, linear otherwise
  std::vector<double> svm_C = {1.0, 10.0, 100.0};
  std::vector<int> svm_degree;      // empty: {2, 3} for nonlinear labels, {1} otherwise
  std::vector<double> fairsvm_lambda = {0.2, 0.5, 1.0, 2.0, 10.0, 50.0, 100.0};
  CvScore fairsvm_cv_score = CvScore::kDistanceGap;
  int svm_iterations = 4000;
  std::vector<int> mlp_hidden = {10, 10};
  MlpOptimizer mlp_optimizer = MlpOptimizer::kGradientDescent;
  double mlp_learning_rate = 0.01;
  int mlp_epochs = 2000;

  double linear_ridge = 0.0;
  double kr_ridge = 1e-3;
  std::optional<double> kr_bandwidth;  // unset: median heuristic
  std::vector<double> kr_cv_ridge;
  std::vector<double> kr_cv_bandwidth_scale;

  // Societal sweep: thresholds evenly spaced over [policy_t_min, policy_t_max].
  double policy_p = 1.0;
  double policy_t_min = -2.0;
  double policy_t_max = 0.0;
  int policy_t_points = 41;
  std::size_t policy_n = 5000;

  int workers = 1;
  std::filesystem::path out = "results";

  // Resolved key/value pairs in schema order, defaults included.
  std::vector<std::pair<std::string, std::string>> Entries() const;
  // FNV-1a of the hashed entries.
  std::uint64_t Hash() const;
  // Throws kInvalidArgument listing every violated constraint.
  void Validate() const;

  Family ResolvedLrFamily() const;
  std::vector<int> ResolvedSvmDegrees() const;
};

// Flat `key = value` lines; '#' starts a comment; lists are comma separated
// except `classifiers`, which is separated by ';'. Collects every problem
// (unknown or repeated keys, malformed values, constraint violations) into
// one kParseError.
ExperimentConfig ParseExperimentConfig(std::string_view text);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);
std::string ConfigSchema();
std::string FormatConfig(const ExperimentConfig& config);
std::string HashHex(std::uint64_t hash);

// Classifier registry: LR, SVM and FairSVM over the selectors X,A / X / X_nd /
// X_nd,U_d, e.g. "SVM(X_nd,U_d)". Candidates are the cross-validation grid.
struct ClassifierPlan {
  std::string name;
  std::vector<ModelSpec> candidates;
  CvScore score = CvScore::kAccuracy;
};

ClassifierPlan PlanClassifier(std::string_view name, const ExperimentConfig& config);  // kParseError
std::string DescribeSpec(const ModelSpec& spec);
// File-name form of a classifier name, e.g. "LR(X_nd,U_d)" -> "LR_X_nd_U_d".
std::string Slug(std::string_view name);

// Per-stage seeds derived from a run seed.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stage);

struct SeedData {
  std::uint64_t seed = 0;
  std::vector<Instance> train;
  std::vector<Instance> test;
};

struct TrainedClassifier {
  std::string name;
  ClassifierModel model;
  std::optional<CrossValidationResult> cv;
  double accuracy = 0.0;  // held-out
};

struct CellResult {
  std::string classifier;
  std::uint64_t seed = 0;
  RecourseScmKind scm = RecourseScmKind::kOracle;
  double accuracy = 0.0;
  std::string chosen;  // DescribeSpec of the trained model
  std::optional<FairnessReport> report;  // unset when the partition is degenerate
  std::string note;                      // why the report is missing
};

struct ExperimentResult {
  std::uint64_t hash = 0;
  std::vector<CellResult> cells;  // seed-major, then classifier, then recourse SCM
  std::vector<std::string> files;  // relative to the output directory, sorted
};

// Pipeline stages. Each wraps module errors as "<stage>: <message>".
SeedData GenerateData(const ExperimentConfig& config, const Scm& oracle, std::uint64_t seed);
Scm FitRecourseScm(const ExperimentConfig& config, RecourseScmKind kind, const SeedData& data);
TrainedClassifier TrainClassifier(const ExperimentConfig& config, const Scm& oracle,
                                  const SeedData& data, std::string_view name);
MetricContext MakeContext(const ExperimentConfig& config, const Scm& oracle, const Scm* search,
                          const SeedData& data, const ClassifierModel& model);
CellResult EvaluateCell(const ExperimentConfig& config, const Scm& oracle, const Scm* search,
                        const SeedData& data, const TrainedClassifier& trained, RecourseScmKind kind,
                        MetricRequest what = {});

// Throws kIoError unless `dir` can be created and written to.
void CheckWritable(const std::filesystem::path& dir);

// Runs everything and, when `write` is set, writes under config.out:
//   manifest.txt, table.md, table.csv, results.csv,
//   seed_<s>/{train,test}.csv (+ sidecars), seed_<s>/scm_<kind>.txt,
//   seed_<s>/models/<slug>.model, seed_<s>/<kind>/<slug>.{individuals,summary}.csv
ExperimentResult RunExperiment(const ExperimentConfig& config, bool write = true);

// Stage-wise entry points used by the CLI; each reads what earlier stages wrote.
void RunGenerateStage(const ExperimentConfig& config);
void RunTrainStage(const ExperimentConfig& config);
void RunRecourseStage(const ExperimentConfig& config);
ExperimentResult RunMetricsStage(const ExperimentConfig& config);
std::string RunSocietalStage(const ExperimentConfig& config);  // returns the CSV, writes societal.csv

// Per (recourse SCM): rows = classifiers, columns Acc, delta_dist, delta_cost,
// delta_ind averaged over seeds. Entries within 0.005 of the column optimum
// (max for accuracy, min for deltas) are bold.
std::string ResultsTableMarkdown(const ExperimentConfig& config, const ExperimentResult& result);
std::string ResultsTableCsv(const ExperimentConfig& config, const ExperimentResult& result);
std::string ResultsCsv(const ExperimentResult& result);

}  // namespace fairrec
