#include "fairrec/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fairrec/error.hpp"
#include "fairrec/estimation.hpp"
#include "fairrec/io.hpp"
#include "fairrec/rng.hpp"
#include "fairrec/societal.hpp"

namespace fairrec {

namespace fs = std::filesystem;

namespace {

template <class F>
auto Staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), stage + ": " + e.message());
  }
}

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> SplitList(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(Trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t ParseUnsigned(const std::string& token) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw Error(ErrorCode::kParseError, "expected a non-negative integer, got '" + token + "'");
  return v;
}

int ParseInt(const std::string& token) {
  int v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw Error(ErrorCode::kParseError, "expected an integer, got '" + token + "'");
  return v;
}

std::vector<double> ParseDoubles(const std::string& value) {
  if (value == "none") return {};
  std::vector<double> out;
  for (const auto& t : SplitList(value, ',')) out.push_back(ParseDouble(t));
  return out;
}

std::vector<int> ParseInts(const std::string& value) {
  std::vector<int> out;
  for (const auto& t : SplitList(value, ',')) out.push_back(ParseInt(t));
  return out;
}

template <class T, class F>
std::string Join(const std::vector<T>& items, F format, std::string_view sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += sep;
    s += format(items[i]);
  }
  return s;
}

std::string Num(double v) { return FormatDouble(v); }
std::string IntStr(int v) { return std::to_string(v); }

struct KeySpec {
  const char* name;
  const char* doc;
  bool hashed;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeySpec>& Keys() {
  static const std::vector<KeySpec> keys = {
      {"world", "IMF | CAU-LIN | CAU-ANM | PROP1-BERNOULLI | VARIANCE-EXAMPLE", true,
       [](ExperimentConfig& c, const std::string& v) { c.world = ParseWorld(v); },
       [](const ExperimentConfig& c) { return std::string(WorldName(c.world)); }},
      {"labels", "linear | nonlinear | sign", true,
       [](ExperimentConfig& c, const std::string& v) { c.labels.form = ParseLabelForm(v); },
       [](const ExperimentConfig& c) { return std::string(LabelFormName(c.labels.form)); }},
      {"label_variable", "variable read by sign labels", true,
       [](ExperimentConfig& c, const std::string& v) { c.labels.variable = v; },
       [](const ExperimentConfig& c) { return c.labels.variable; }},
      {"label_boundary", "sign labels: y = sgn(variable - boundary)", true,
       [](ExperimentConfig& c, const std::string& v) { c.labels.boundary = ParseDouble(v); },
       [](const ExperimentConfig& c) { return Num(c.labels.boundary); }},
      {"n_train", "training observations per seed", true,
       [](ExperimentConfig& c, const std::string& v) { c.n_train = ParseUnsigned(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.n_train); }},
      {"n_test", "held-out observations per seed", true,
       [](ExperimentConfig& c, const std::string& v) { c.n_test = ParseUnsigned(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.n_test); }},
      {"seeds", "comma-separated run seeds", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.seeds.clear();
         for (const auto& t : SplitList(v, ',')) c.seeds.push_back(ParseUnsigned(t));
       },
       [](const ExperimentConfig& c) {
         return Join(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
       }},
      {"classifiers", "';'-separated names, e.g. LR(X,A);SVM(X_nd);FairSVM(X,A)", true,
       [](ExperimentConfig& c, const std::string& v) { c.classifiers = SplitList(v, ';'); },
       [](const ExperimentConfig& c) { return Join(c.classifiers, [](const std::string& s) { return s; }, ";"); }},
      {"recourse_scm", "comma-separated: oracle | fitted-linear | fitted-kernel-ridge", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.recourse_scm.clear();
         for (const auto& t : SplitList(v, ',')) c.recourse_scm.push_back(ParseRecourseScm(t));
       },
       [](const ExperimentConfig& c) {
         return Join(c.recourse_scm, [](RecourseScmKind k) { return std::string(RecourseScmName(k)); });
       }},
      {"bins", "grid values per actionable variable", true,
       [](ExperimentConfig& c, const std::string& v) { c.bins = ParseInt(v); },
       [](const ExperimentConfig& c) { return IntStr(c.bins); }},
      {"max_subset_size", "largest intervened set, or 'all'", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.max_subset_size = v == "all" ? std::nullopt : std::optional<std::size_t>(ParseUnsigned(v));
       },
       [](const ExperimentConfig& c) {
         return c.max_subset_size ? std::to_string(*c.max_subset_size) : std::string("all");
       }},
      {"causal_cost", "l2-intervention | l2-endpoint", true,
       [](ExperimentConfig& c, const std::string& v) { c.causal_cost = ParseCostKind(v); },
       [](const ExperimentConfig& c) { return std::string(CostKindName(c.causal_cost)); }},
      {"imf_cost", "l2-intervention | l2-endpoint", true,
       [](ExperimentConfig& c, const std::string& v) { c.imf_cost = ParseCostKind(v); },
       [](const ExperimentConfig& c) { return std::string(CostKindName(c.imf_cost)); }},
      {"negatives_per_group", "negatively classified test points sampled per group, or 'all'", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.negatives_per_group = v == "all" ? std::nullopt : std::optional<std::size_t>(ParseUnsigned(v));
       },
       [](const ExperimentConfig& c) {
         return c.negatives_per_group ? std::to_string(*c.negatives_per_group) : std::string("all");
       }},
      {"table_delta_dist", "delta_dist column of the table: margin (|f|/||w||, grid where undefined) | grid",
       true, [](ExperimentConfig& c, const std::string& v) { c.table_delta_dist = v; },
       [](const ExperimentConfig& c) { return c.table_delta_dist; }},
      {"cv_folds", "cross-validation folds", true,
       [](ExperimentConfig& c, const std::string& v) { c.cv_folds = ParseInt(v); },
       [](const ExperimentConfig& c) { return IntStr(c.cv_folds); }},
      {"lr_family", "auto | logistic-linear | logistic-mlp (auto: mlp for nonlinear labels)", true,
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "auto") {
           c.lr_family.reset();
           return;
         }
         const Family f = ParseFamily(v);
         if (f != Family::kLogisticLinear && f != Family::kLogisticMlp)
           throw Error(ErrorCode::kParseError, "expected auto, logistic-linear or logistic-mlp");
         c.lr_family = f;
       },
       [](const ExperimentConfig& c) { return std::string(FamilyName(c.ResolvedLrFamily())); }},
      {"svm_C", "SVM regularisation grid", true,
       [](ExperimentConfig& c, const std::string& v) { c.svm_C = ParseDoubles(v); },
       [](const ExperimentConfig& c) { return Join(c.svm_C, Num); }},
      {"svm_degree", "polynomial degrees, or auto (2,3 for nonlinear labels, else 1)", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.svm_degree = v == "auto" ? std::vector<int>{} : ParseInts(v);
       },
       [](const ExperimentConfig& c) { return Join(c.ResolvedSvmDegrees(), IntStr); }},
      {"fairsvm_lambda", "FairSVM penalty grid", true,
       [](ExperimentConfig& c, const std::string& v) { c.fairsvm_lambda = ParseDoubles(v); },
       [](const ExperimentConfig& c) { return Join(c.fairsvm_lambda, Num); }},
      {"fairsvm_cv_score", "FairSVM selection: gap | accuracy-minus-gap | accuracy", true,
       [](ExperimentConfig& c, const std::string& v) { c.fairsvm_cv_score = ParseCvScore(v); },
       [](const ExperimentConfig& c) { return std::string(CvScoreName(c.fairsvm_cv_score)); }},
      {"svm_iterations", "subgradient iterations", true,
       [](ExperimentConfig& c, const std::string& v) { c.svm_iterations = ParseInt(v); },
       [](const ExperimentConfig& c) { return IntStr(c.svm_iterations); }},
      {"mlp_hidden", "hidden layer widths", true,
       [](ExperimentConfig& c, const std::string& v) { c.mlp_hidden = ParseInts(v); },
       [](const ExperimentConfig& c) { return Join(c.mlp_hidden, IntStr); }},
      {"mlp_optimizer", "gd | adam", true,
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "gd") c.mlp_optimizer = MlpOptimizer::kGradientDescent;
         else if (v == "adam") c.mlp_optimizer = MlpOptimizer::kAdam;
         else throw Error(ErrorCode::kParseError, "expected gd or adam, got '" + v + "'");
       },
       [](const ExperimentConfig& c) {
         return std::string(c.mlp_optimizer == MlpOptimizer::kAdam ? "adam" : "gd");
       }},
      {"mlp_learning_rate", "step size", true,
       [](ExperimentConfig& c, const std::string& v) { c.mlp_learning_rate = ParseDouble(v); },
       [](const ExperimentConfig& c) { return Num(c.mlp_learning_rate); }},
      {"mlp_epochs", "full-batch epochs", true,
       [](ExperimentConfig& c, const std::string& v) { c.mlp_epochs = ParseInt(v); },
       [](const ExperimentConfig& c) { return IntStr(c.mlp_epochs); }},
      {"linear_ridge", "ridge of the fitted linear SCM", true,
       [](ExperimentConfig& c, const std::string& v) { c.linear_ridge = ParseDouble(v); },
       [](const ExperimentConfig& c) { return Num(c.linear_ridge); }},
      {"kr_ridge", "ridge of the fitted kernel-ridge SCM", true,
       [](ExperimentConfig& c, const std::string& v) { c.kr_ridge = ParseDouble(v); },
       [](const ExperimentConfig& c) { return Num(c.kr_ridge); }},
      {"kr_bandwidth", "RBF bandwidth, or median (median pairwise distance)", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.kr_bandwidth = v == "median" ? std::nullopt : std::optional<double>(ParseDouble(v));
       },
       [](const ExperimentConfig& c) { return c.kr_bandwidth ? Num(*c.kr_bandwidth) : std::string("median"); }},
      {"kr_cv_ridge", "ridge candidates for kernel ridge, or none", true,
       [](ExperimentConfig& c, const std::string& v) { c.kr_cv_ridge = ParseDoubles(v); },
       [](const ExperimentConfig& c) {
         return c.kr_cv_ridge.empty() ? std::string("none") : Join(c.kr_cv_ridge, Num);
       }},
      {"kr_cv_bandwidth_scale", "bandwidth multipliers for kernel ridge, or none", true,
       [](ExperimentConfig& c, const std::string& v) { c.kr_cv_bandwidth_scale = ParseDoubles(v); },
       [](const ExperimentConfig& c) {
         return c.kr_cv_bandwidth_scale.empty() ? std::string("none") : Join(c.kr_cv_bandwidth_scale, Num);
       }},
      {"policy_p", "subsidy offer probability", true,
       [](ExperimentConfig& c, const std::string& v) { c.policy_p = ParseDouble(v); },
       [](const ExperimentConfig& c) { return Num(c.policy_p); }},
      {"policy_t_min", "lowest threshold", true,
       [](ExperimentConfig& c, const std::string& v) { c.policy_t_min = ParseDouble(v); },
       [](const ExperimentConfig& c) { return Num(c.policy_t_min); }},
      {"policy_t_max", "highest threshold", true,
       [](ExperimentConfig& c, const std::string& v) { c.policy_t_max = ParseDouble(v); },
       [](const ExperimentConfig& c) { return Num(c.policy_t_max); }},
      {"policy_t_points", "thresholds in the sweep", true,
       [](ExperimentConfig& c, const std::string& v) { c.policy_t_points = ParseInt(v); },
       [](const ExperimentConfig& c) { return IntStr(c.policy_t_points); }},
      {"policy_n", "individuals simulated per policy", true,
       [](ExperimentConfig& c, const std::string& v) { c.policy_n = ParseUnsigned(v); },
       [](const ExperimentConfig& c) { return std::to_string(c.policy_n); }},
      {"workers", "threads; results do not depend on it", false,
       [](ExperimentConfig& c, const std::string& v) { c.workers = ParseInt(v); },
       [](const ExperimentConfig& c) { return IntStr(c.workers); }},
      {"out", "output directory", false,
       [](ExperimentConfig& c, const std::string& v) { c.out = v; },
       [](const ExperimentConfig& c) { return c.out.generic_string(); }},
  };
  return keys;
}

bool IsLogisticLabelWorld(World w) {
  return w == World::kImf || w == World::kCauLin || w == World::kCauAnm;
}

}  // namespace

std::string_view RecourseScmName(RecourseScmKind kind) {
  switch (kind) {
    case RecourseScmKind::kOracle: return "oracle";
    case RecourseScmKind::kFittedLinear: return "fitted-linear";
    case RecourseScmKind::kFittedKernelRidge: return "fitted-kernel-ridge";
  }
  return "?";
}

RecourseScmKind ParseRecourseScm(std::string_view name) {
  for (auto k : {RecourseScmKind::kOracle, RecourseScmKind::kFittedLinear, RecourseScmKind::kFittedKernelRidge})
    if (RecourseScmName(k) == name) return k;
  throw Error(ErrorCode::kParseError, "unknown recourse SCM '" + std::string(name) + "'");
}

Family ExperimentConfig::ResolvedLrFamily() const {
  if (lr_family) return *lr_family;
  return labels.form == LabelForm::kNonlinearLogistic ? Family::kLogisticMlp : Family::kLogisticLinear;
}

std::vector<int> ExperimentConfig::ResolvedSvmDegrees() const {
  if (!svm_degree.empty()) return svm_degree;
  if (labels.form == LabelForm::kNonlinearLogistic) return {2, 3};
  return {1};
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::Entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : Keys()) out.emplace_back(k.name, k.get(*this));
  return out;
}

std::uint64_t ExperimentConfig::Hash() const {
  std::string text;
  for (const auto& k : Keys())
    if (k.hashed) text += std::string(k.name) + '=' + k.get(*this) + '\n';
  return Fnv1a64(text);
}

void ExperimentConfig::Validate() const {
  std::vector<std::string> problems;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  if (labels.form == LabelForm::kDeterministicSign) {
    need(BuildWorld(world).find(labels.variable).has_value(),
         "label_variable '" + labels.variable + "' is not a variable of " + std::string(WorldName(world)));
  } else {
    need(IsLogisticLabelWorld(world), "logistic labels need a world with x1, x2, x3");
  }
  need(n_train >= 20, "n_train must be at least 20");
  need(n_train >= static_cast<std::size_t>(std::max(cv_folds, 0)), "n_train must be at least cv_folds");
  need(n_test >= 1, "n_test must be positive");
  need(!seeds.empty(), "seeds must not be empty");
  need(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), "seeds must be distinct");
  need(!classifiers.empty(), "classifiers must not be empty");
  need(std::set<std::string>(classifiers.begin(), classifiers.end()).size() == classifiers.size(),
       "classifiers must be distinct");
  for (const auto& name : classifiers) {
    try {
      PlanClassifier(name, *this);
    } catch (const Error& e) {
      problems.push_back(e.message());
    }
  }
  need(!recourse_scm.empty(), "recourse_scm must not be empty");
  need(std::set<RecourseScmKind>(recourse_scm.begin(), recourse_scm.end()).size() == recourse_scm.size(),
       "recourse_scm entries must be distinct");
  const bool fitted = std::any_of(recourse_scm.begin(), recourse_scm.end(),
                                  [](RecourseScmKind k) { return k != RecourseScmKind::kOracle; });
  need(!fitted || n_train >= 50, "fitted recourse SCMs need n_train >= 50");
  need(bins >= 2, "bins must be at least 2");
  need(!max_subset_size || *max_subset_size >= 1, "max_subset_size must be positive or 'all'");
  need(!negatives_per_group || *negatives_per_group >= 1, "negatives_per_group must be positive or 'all'");
  need(table_delta_dist == "margin" || table_delta_dist == "grid", "table_delta_dist must be margin or grid");
  need(cv_folds >= 2, "cv_folds must be at least 2");
  need(!svm_C.empty() && std::all_of(svm_C.begin(), svm_C.end(), [](double c) { return c > 0.0; }),
       "svm_C must list positive values");
  for (int d : ResolvedSvmDegrees()) need(d >= 1 && d <= 3, "svm_degree values must lie in 1..3");
  need(!fairsvm_lambda.empty() &&
           std::all_of(fairsvm_lambda.begin(), fairsvm_lambda.end(), [](double l) { return l >= 0.0; }),
       "fairsvm_lambda must list non-negative values");
  need(svm_iterations >= 1, "svm_iterations must be positive");
  need(!mlp_hidden.empty() && std::all_of(mlp_hidden.begin(), mlp_hidden.end(), [](int h) { return h >= 1; }),
       "mlp_hidden must list positive widths");
  need(mlp_learning_rate > 0.0, "mlp_learning_rate must be positive");
  need(mlp_epochs >= 1, "mlp_epochs must be positive");
  need(linear_ridge >= 0.0, "linear_ridge must be non-negative");
  need(kr_ridge >= 0.0, "kr_ridge must be non-negative");
  need(!kr_bandwidth || *kr_bandwidth > 0.0, "kr_bandwidth must be positive or 'median'");
  need(std::all_of(kr_cv_ridge.begin(), kr_cv_ridge.end(), [](double r) { return r >= 0.0; }),
       "kr_cv_ridge values must be non-negative");
  need(std::all_of(kr_cv_bandwidth_scale.begin(), kr_cv_bandwidth_scale.end(), [](double s) { return s > 0.0; }),
       "kr_cv_bandwidth_scale values must be positive");
  need(policy_p >= 0.0 && policy_p <= 1.0, "policy_p must lie in [0, 1]");
  need(policy_t_min <= policy_t_max && policy_t_max <= 0.0, "need policy_t_min <= policy_t_max <= 0");
  need(policy_t_points >= 1, "policy_t_points must be positive");
  need(policy_n >= 1, "policy_n must be positive");
  need(workers >= 1, "workers must be positive");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorCode::kInvalidArgument, msg);
  }
}

ExperimentConfig ParseExperimentConfig(std::string_view text) {
  ExperimentConfig config;
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  for (int line = 1; std::getline(in, raw); ++line) {
    const auto hash = raw.find('#');
    const std::string content = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = "line " + std::to_string(line) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = Trim(content.substr(0, eq));
    const std::string value = Trim(content.substr(eq + 1));
    const auto& keys = Keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) { return key == k.name; });
    if (it == keys.end()) {
      problems.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (!seen.insert(key).second) {
      problems.push_back(where + "key '" + key + "' given twice");
      continue;
    }
    try {
      it->set(config, value);
    } catch (const Error& e) {
      problems.push_back(where + key + ": " + e.message());
    }
  }
  if (problems.empty()) {
    try {
      config.Validate();
    } catch (const Error& e) {
      problems.push_back(e.message());
    }
  }
  if (!problems.empty()) {
    std::string msg = "configuration rejected:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorCode::kParseError, msg);
  }
  return config;
}

ExperimentConfig LoadExperimentConfig(const fs::path& path) {
  return Staged("config " + path.generic_string(), [&] { return ParseExperimentConfig(ReadFile(path)); });
}

std::string ConfigSchema() {
  const ExperimentConfig defaults;
  std::string s;
  for (const auto& k : Keys()) {
    // These two resolve from the labels; a copied schema must keep following them.
    const bool automatic = k.name == std::string_view("lr_family") || k.name == std::string_view("svm_degree");
    s += std::string(k.name) + " = " + (automatic ? std::string("auto") : k.get(defaults)) + "    # " + k.doc +
         (k.hashed ? "" : " (not hashed)") + '\n';
  }
  return s;
}

std::string FormatConfig(const ExperimentConfig& config) {
  std::string s;
  for (const auto& [k, v] : config.Entries()) s += k + " = " + v + '\n';
  return s;
}

std::string HashHex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ClassifierPlan PlanClassifier(std::string_view name, const ExperimentConfig& config) {
  const auto open = name.find('(');
  if (open == std::string_view::npos || name.back() != ')')
    throw Error(ErrorCode::kParseError, "unknown classifier '" + std::string(name) + "'");
  const std::string family(name.substr(0, open));
  const std::string inputs(name.substr(open + 1, name.size() - open - 2));
  static const std::map<std::string, SelectorMode> selectors = {
      {"X,A", SelectorMode::kXAndA},
      {"X", SelectorMode::kXOnly},
      {"X_nd", SelectorMode::kNondescendants},
      {"X_nd,U_d", SelectorMode::kNondescendantsPlusExogenous}};
  const auto sel = selectors.find(inputs);
  if (sel == selectors.end() || (family != "LR" && family != "SVM" && family != "FairSVM"))
    throw Error(ErrorCode::kParseError, "unknown classifier '" + std::string(name) +
                                            "' (expected LR, SVM or FairSVM over X,A / X / X_nd / X_nd,U_d)");
  ClassifierPlan plan;
  plan.name = std::string(name);
  ModelSpec base;
  base.label = plan.name;
  base.selector = sel->second;
  if (family == "LR") {
    base.family = config.ResolvedLrFamily();
    base.hidden = config.mlp_hidden;
    base.mlp_optimizer = config.mlp_optimizer;
    base.learning_rate = config.mlp_learning_rate;
    base.epochs = config.mlp_epochs;
    plan.candidates.push_back(base);
    return plan;
  }
  base.family = family == "SVM" ? Family::kSvm : Family::kFairSvm;
  base.svm_iterations = config.svm_iterations;
  const std::vector<double> lambdas = family == "SVM" ? std::vector<double>{0.0} : config.fairsvm_lambda;
  for (int d : config.ResolvedSvmDegrees())
    for (double C : config.svm_C)
      for (double l : lambdas) {
        ModelSpec s = base;
        s.degree = d;
        s.C = C;
        s.lambda = l;
        plan.candidates.push_back(s);
      }
  if (family == "FairSVM") plan.score = config.fairsvm_cv_score;
  return plan;
}

std::string DescribeSpec(const ModelSpec& spec) {
  std::string s(FamilyName(spec.family));
  switch (spec.family) {
    case Family::kSvm: s += " degree=" + IntStr(spec.degree) + " C=" + Num(spec.C); break;
    case Family::kFairSvm:
      s += " degree=" + IntStr(spec.degree) + " C=" + Num(spec.C) + " lambda=" + Num(spec.lambda);
      break;
    case Family::kLogisticMlp:
      s += " hidden=" + Join(spec.hidden, IntStr, "x") +
           (spec.mlp_optimizer == MlpOptimizer::kAdam ? " adam" : " gd") + " lr=" + Num(spec.learning_rate) +
           " epochs=" + IntStr(spec.epochs);
      break;
    default: break;
  }
  return s;
}

std::string Slug(std::string_view name) {
  std::string s;
  for (char c : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-';
    if (keep) s += c;
    else if (!s.empty() && s.back() != '_') s += '_';
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stage) {
  return Fnv1a64(std::string(stage) + ':' + std::to_string(seed));
}

SeedData GenerateData(const ExperimentConfig& config, const Scm& oracle, std::uint64_t seed) {
  return Staged("generate (seed " + std::to_string(seed) + ")", [&] {
    SeedData d;
    d.seed = seed;
    d.train = GenerateLabels(oracle, SampleInstances(oracle, config.n_train, DeriveSeed(seed, "train")),
                             config.labels, DeriveSeed(seed, "train-labels"));
    d.test = GenerateLabels(oracle, SampleInstances(oracle, config.n_test, DeriveSeed(seed, "test")),
                            config.labels, DeriveSeed(seed, "test-labels"));
    return d;
  });
}

Scm FitRecourseScm(const ExperimentConfig& config, RecourseScmKind kind, const SeedData& data) {
  const std::string name(RecourseScmName(kind));
  return Staged("fit " + name + " (seed " + std::to_string(data.seed) + ")", [&] {
    const Scm oracle = BuildWorld(config.world);
    if (kind == RecourseScmKind::kOracle) return oracle;
    AnmFitConfig fit;
    fit.seed = DeriveSeed(data.seed, "fit-" + name);
    fit.workers = config.workers;
    fit.cv_folds = config.cv_folds;
    if (kind == RecourseScmKind::kFittedLinear) {
      fit.regressor = Regressor::kLinearRidge;
      fit.ridge = config.linear_ridge;
    } else {
      fit.regressor = Regressor::kKernelRidge;
      fit.ridge = config.kr_ridge;
      fit.bandwidth = config.kr_bandwidth;
      fit.cv_ridge = config.kr_cv_ridge;
      fit.cv_bandwidth_scale = config.kr_cv_bandwidth_scale;
    }
    return FitAnm(data.train, oracle.graph(), fit);
  });
}

TrainedClassifier TrainClassifier(const ExperimentConfig& config, const Scm& oracle, const SeedData& data,
                                  std::string_view name) {
  const std::string stage = "train " + std::string(name) + " (seed " + std::to_string(data.seed) + ")";
  return Staged(stage, [&] {
    const ClassifierPlan plan = PlanClassifier(name, config);
    TrainedClassifier t;
    t.name = plan.name;
    ModelSpec chosen = plan.candidates.front();
    if (plan.candidates.size() > 1) {
      t.cv = CrossValidate(plan.candidates, oracle, data.train, config.cv_folds, DeriveSeed(data.seed, "cv"),
                           plan.score);
      chosen = plan.candidates[t.cv->best];
    }
    t.model = Train(chosen, oracle, data.train, DeriveSeed(data.seed, "model-" + plan.name));
    t.accuracy = Accuracy(t.model, BuildMatrix(t.model.selector, oracle, data.test));
    return t;
  });
}

MetricContext MakeContext(const ExperimentConfig& config, const Scm& oracle, const Scm* search,
                          const SeedData& data, const ClassifierModel& model) {
  std::vector<std::size_t> actionable;
  for (std::size_t i : model.selector.endogenous)
    if (i != oracle.protected_index()) actionable.push_back(i);
  if (actionable.empty())
    throw Error(ErrorCode::kInvalidArgument, "classifier " + model.spec.label + " reads no actionable feature");
  MetricContext ctx;
  ctx.oracle = &oracle;
  ctx.search = search;
  ctx.causal_space = ActionSpace::FromTraining(oracle, data.train, actionable, config.bins);
  ctx.causal_space.max_subset_size = config.max_subset_size;
  ctx.imf_space = ctx.causal_space;
  ctx.causal_cost = config.causal_cost;
  ctx.imf_cost = config.imf_cost;
  ctx.workers = config.workers;
  return ctx;
}

CellResult EvaluateCell(const ExperimentConfig& config, const Scm& oracle, const Scm* search,
                        const SeedData& data, const TrainedClassifier& trained, RecourseScmKind kind,
                        MetricRequest what) {
  CellResult c;
  c.classifier = trained.name;
  c.seed = data.seed;
  c.scm = kind;
  c.accuracy = trained.accuracy;
  c.chosen = DescribeSpec(trained.model.spec);
  const std::string stage = "metrics " + trained.name + " / " + std::string(RecourseScmName(kind)) + " (seed " +
                            std::to_string(data.seed) + ")";
  Staged(stage, [&] {
    const MetricContext ctx = MakeContext(config, oracle, search, data, trained.model);
    try {
      const GroupPartition part =
          Partition(data.test, trained.model, oracle, config.negatives_per_group, DeriveSeed(data.seed, "partition"));
      c.report = EvaluateFairness(data.test, part, trained.model, ctx, what);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyNegativeGroup) throw;
      c.note = e.message();
    }
  });
  return c;
}

void CheckWritable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create output directory " + dir.generic_string() + ": " + ec.message());
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "ok") || !f.flush())
      throw Error(ErrorCode::kIoError, "output directory " + dir.generic_string() + " is not writable");
  }
  fs::remove(probe, ec);
}

namespace {

std::string SeedDir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::string ScmFile(RecourseScmKind kind) { return "scm_" + std::string(RecourseScmName(kind)) + ".txt"; }

std::string Csv(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string OptNum(const std::optional<double>& v) { return v ? Num(*v) : std::string(); }

// Files written by one run, relative to config.out.
class Writer {
 public:
  explicit Writer(fs::path root) : root_(std::move(root)) {}

  void Text(const std::string& rel, std::string_view content) {
    WriteFile(root_ / rel, content);
    Track(rel);
  }
  void Dataset(const std::string& rel, const Scm& scm, const std::vector<Instance>& rows) {
    fs::create_directories((root_ / rel).parent_path());
    WriteDataset(root_ / rel, scm, rows);
    for (const std::string& f : {rel, rel + ".schema", rel + ".exogenous.csv"})
      if (fs::exists(root_ / f)) Track(f);
  }
  void Model(const std::string& rel, const ClassifierModel& model) {
    fs::create_directories((root_ / rel).parent_path());
    SaveModel(model, root_ / rel);
    Track(rel);
  }
  void ScmText(const std::string& rel, const Scm& scm) {
    fs::create_directories((root_ / rel).parent_path());
    SaveScm(scm, root_ / rel);
    Track(rel);
  }
  const std::set<std::string>& files() const { return files_; }
  const fs::path& root() const { return root_; }

 private:
  void Track(const std::string& rel) { files_.insert(rel); }
  fs::path root_;
  std::set<std::string> files_;
};

void WriteDatasets(Writer& w, const Scm& oracle, const SeedData& d) {
  w.Dataset(SeedDir(d.seed) + "/train.csv", oracle, d.train);
  w.Dataset(SeedDir(d.seed) + "/test.csv", oracle, d.test);
}

SeedData ReadDatasets(const ExperimentConfig& config, const Scm& oracle, std::uint64_t seed) {
  return Staged("read datasets (seed " + std::to_string(seed) + ")", [&] {
    SeedData d;
    d.seed = seed;
    d.train = ReadDataset(config.out / SeedDir(seed) / "train.csv", oracle);
    d.test = ReadDataset(config.out / SeedDir(seed) / "test.csv", oracle);
    return d;
  });
}

std::string ModelFile(std::uint64_t seed, const std::string& name) {
  return SeedDir(seed) + "/models/" + Slug(name) + ".model";
}

std::string CvCsv(const TrainedClassifier& t, const ClassifierPlan& plan) {
  std::string s = "candidate,spec,mean_accuracy,mean_gap,mean_score,chosen\n";
  if (!t.cv) return s + "0," + Csv(DescribeSpec(plan.candidates.front())) + ",,,,1\n";
  for (std::size_t k = 0; k < plan.candidates.size(); ++k) {
    s += std::to_string(k) + ',' + Csv(DescribeSpec(plan.candidates[k])) + ',' + Num(t.cv->mean_accuracy[k]) + ',' +
         (k < t.cv->mean_gap.size() ? Num(t.cv->mean_gap[k]) : std::string()) + ',' + Num(t.cv->mean_score[k]) + ',' +
         (k == t.cv->best ? "1" : "0") + '\n';
  }
  return s;
}

void WriteCell(Writer& w, const CellResult& c, const Scm& oracle) {
  if (!c.report) return;
  const std::string base = SeedDir(c.seed) + "/" + std::string(RecourseScmName(c.scm)) + "/" + Slug(c.classifier);
  fs::create_directories((w.root() / base).parent_path());
  w.Text(base + ".individuals.csv", IndividualsCsv(*c.report, oracle));
  w.Text(base + ".summary.csv", SummaryCsv(*c.report));
}

std::string Manifest(const ExperimentConfig& config, const Writer& w) {
  std::string s = "# experiment manifest\nconfig_hash = " + HashHex(config.Hash()) + "\n\n[config]\n";
  for (const auto& k : Keys())
    if (k.hashed) s += std::string(k.name) + " = " + k.get(config) + '\n';
  s += "\n[seeds]\n";
  for (std::uint64_t seed : config.seeds) {
    s += std::to_string(seed) + ": train=" + std::to_string(DeriveSeed(seed, "train")) +
         " train-labels=" + std::to_string(DeriveSeed(seed, "train-labels")) +
         " test=" + std::to_string(DeriveSeed(seed, "test")) +
         " test-labels=" + std::to_string(DeriveSeed(seed, "test-labels")) +
         " cv=" + std::to_string(DeriveSeed(seed, "cv")) +
         " partition=" + std::to_string(DeriveSeed(seed, "partition")) + '\n';
  }
  s += "\n[files]\n";
  for (const auto& f : w.files()) s += HashHex(Fnv1a64(ReadFile(w.root() / f))) + "  " + f + '\n';
  return s;
}

void WriteReports(Writer& w, const ExperimentConfig& config, ExperimentResult& result, const Scm& oracle) {
  for (const auto& c : result.cells) WriteCell(w, c, oracle);
  w.Text("results.csv", ResultsCsv(result));
  w.Text("table.md", ResultsTableMarkdown(config, result));
  w.Text("table.csv", ResultsTableCsv(config, result));
  const std::string manifest = Manifest(config, w);
  w.Text("manifest.txt", manifest);
  result.files.assign(w.files().begin(), w.files().end());
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& config, bool write) {
  config.Validate();
  if (write) CheckWritable(config.out);
  Writer w(config.out);
  ExperimentResult result;
  result.hash = config.Hash();
  const Scm oracle = BuildWorld(config.world);
  for (std::uint64_t seed : config.seeds) {
    const SeedData data = GenerateData(config, oracle, seed);
    if (write) WriteDatasets(w, oracle, data);
    std::map<RecourseScmKind, Scm> fitted;
    for (RecourseScmKind kind : config.recourse_scm) {
      if (kind == RecourseScmKind::kOracle) continue;
      fitted.emplace(kind, FitRecourseScm(config, kind, data));
      if (write) w.ScmText(SeedDir(seed) + "/" + ScmFile(kind), fitted.at(kind));
    }
    for (const auto& name : config.classifiers) {
      const TrainedClassifier t = TrainClassifier(config, oracle, data, name);
      if (write) {
        w.Model(ModelFile(seed, name), t.model);
        w.Text(SeedDir(seed) + "/models/" + Slug(name) + ".cv.csv", CvCsv(t, PlanClassifier(name, config)));
      }
      for (RecourseScmKind kind : config.recourse_scm) {
        const Scm* search = kind == RecourseScmKind::kOracle ? nullptr : &fitted.at(kind);
        result.cells.push_back(EvaluateCell(config, oracle, search, data, t, kind));
      }
    }
  }
  if (write) WriteReports(w, config, result, oracle);
  return result;
}

void RunGenerateStage(const ExperimentConfig& config) {
  config.Validate();
  CheckWritable(config.out);
  Writer w(config.out);
  const Scm oracle = BuildWorld(config.world);
  for (std::uint64_t seed : config.seeds) WriteDatasets(w, oracle, GenerateData(config, oracle, seed));
}

void RunTrainStage(const ExperimentConfig& config) {
  config.Validate();
  CheckWritable(config.out);
  Writer w(config.out);
  const Scm oracle = BuildWorld(config.world);
  for (std::uint64_t seed : config.seeds) {
    const SeedData data = ReadDatasets(config, oracle, seed);
    for (RecourseScmKind kind : config.recourse_scm)
      if (kind != RecourseScmKind::kOracle)
        w.ScmText(SeedDir(seed) + "/" + ScmFile(kind), FitRecourseScm(config, kind, data));
    for (const auto& name : config.classifiers) {
      const TrainedClassifier t = TrainClassifier(config, oracle, data, name);
      w.Model(ModelFile(seed, name), t.model);
      w.Text(SeedDir(seed) + "/models/" + Slug(name) + ".cv.csv", CvCsv(t, PlanClassifier(name, config)));
    }
  }
}

namespace {

// Evaluates every cell from the files written by the generate and train stages.
template <class Visit>
void ForEachStoredCell(const ExperimentConfig& config, const Scm& oracle, MetricRequest what, Visit visit) {
  for (std::uint64_t seed : config.seeds) {
    const SeedData data = ReadDatasets(config, oracle, seed);
    std::map<RecourseScmKind, Scm> fitted;
    for (RecourseScmKind kind : config.recourse_scm)
      if (kind != RecourseScmKind::kOracle)
        fitted.emplace(kind, Staged("read fitted SCM (seed " + std::to_string(seed) + ")", [&] {
                         return LoadScm(config.out / SeedDir(seed) / ScmFile(kind));
                       }));
    for (const auto& name : config.classifiers) {
      TrainedClassifier t;
      t.name = name;
      Staged("read model " + name + " (seed " + std::to_string(seed) + ")", [&] {
        t.model = LoadModel(config.out / ModelFile(seed, name));
        t.accuracy = Accuracy(t.model, BuildMatrix(t.model.selector, oracle, data.test));
      });
      for (RecourseScmKind kind : config.recourse_scm) {
        const Scm* search = kind == RecourseScmKind::kOracle ? nullptr : &fitted.at(kind);
        visit(EvaluateCell(config, oracle, search, data, t, kind, what));
      }
    }
  }
}

}  // namespace

void RunRecourseStage(const ExperimentConfig& config) {
  config.Validate();
  CheckWritable(config.out);
  Writer w(config.out);
  const Scm oracle = BuildWorld(config.world);
  ForEachStoredCell(config, oracle, MetricRequest{true, true, false}, [&](const CellResult& c) {
    if (!c.report) return;
    const std::string rel = SeedDir(c.seed) + "/" + std::string(RecourseScmName(c.scm)) + "/" + Slug(c.classifier) +
                            ".recourse.csv";
    fs::create_directories((w.root() / rel).parent_path());
    w.Text(rel, IndividualsCsv(*c.report, oracle));
  });
}

ExperimentResult RunMetricsStage(const ExperimentConfig& config) {
  config.Validate();
  CheckWritable(config.out);
  Writer w(config.out);
  const Scm oracle = BuildWorld(config.world);
  ExperimentResult result;
  result.hash = config.Hash();
  ForEachStoredCell(config, oracle, MetricRequest{}, [&](CellResult c) { result.cells.push_back(std::move(c)); });
  // Inputs written by earlier stages are part of the record.
  for (std::uint64_t seed : config.seeds) {
    for (const std::string f : {"train.csv", "test.csv"})
      for (const std::string suffix : {"", ".schema", ".exogenous.csv"}) {
        const std::string rel = SeedDir(seed) + "/" + f + suffix;
        if (fs::exists(config.out / rel)) w.Text(rel, ReadFile(config.out / rel));
      }
    for (RecourseScmKind kind : config.recourse_scm)
      if (kind != RecourseScmKind::kOracle) {
        const std::string rel = SeedDir(seed) + "/" + ScmFile(kind);
        w.Text(rel, ReadFile(config.out / rel));
      }
    for (const auto& name : config.classifiers) {
      for (const std::string& rel : {ModelFile(seed, name), SeedDir(seed) + "/models/" + Slug(name) + ".cv.csv"})
        if (fs::exists(config.out / rel)) w.Text(rel, ReadFile(config.out / rel));
    }
  }
  WriteReports(w, config, result, oracle);
  return result;
}

std::string RunSocietalStage(const ExperimentConfig& config) {
  config.Validate();
  CheckWritable(config.out);
  return Staged("societal", [&] {
    const Scm base = BuildWorld(World::kVarianceExample);
    ModelSpec spec;
    spec.label = "sgn(x)";
    spec.family = Family::kFixedLinear;
    spec.selector = SelectorMode::kXOnly;
    spec.fixed_weights = {1.0};
    const ClassifierModel model = Train(spec, base, {}, 0);
    std::vector<double> thresholds;
    const int k = config.policy_t_points;
    for (int i = 0; i < k; ++i)
      thresholds.push_back(k == 1 ? config.policy_t_min
                                  : config.policy_t_min + (config.policy_t_max - config.policy_t_min) * i / (k - 1));
    const auto outcomes = SweepPolicies(base, model, thresholds, config.policy_p, config.policy_n,
                                        DeriveSeed(config.seeds.front(), "societal"), config.workers);
    const std::string csv = PolicyCsv(outcomes);
    WriteFile(config.out / "societal.csv", csv);
    return csv;
  });
}

namespace {

struct Aggregate {
  std::string classifier;
  std::size_t seeds = 0;
  double accuracy = 0.0;
  double dist = NAN, cost = NAN, ind = NAN;
  bool dist_grid_fallback = false;
  std::size_t reported = 0;
};

std::vector<Aggregate> AggregateFor(const ExperimentConfig& config, const ExperimentResult& result,
                                    RecourseScmKind kind) {
  std::vector<Aggregate> rows;
  for (const auto& name : config.classifiers) {
    Aggregate a;
    a.classifier = name;
    double dist = 0, cost = 0, ind = 0;
    for (const auto& c : result.cells) {
      if (c.classifier != name || c.scm != kind) continue;
      ++a.seeds;
      a.accuracy += c.accuracy;
      if (!c.report) continue;
      ++a.reported;
      double d = c.report->delta_dist;
      if (config.table_delta_dist == "margin") {
        if (c.report->delta_dist_margin) d = *c.report->delta_dist_margin;
        else a.dist_grid_fallback = true;
      }
      dist += d;
      cost += c.report->delta_cost;
      ind += c.report->delta_ind;
    }
    if (a.seeds) a.accuracy /= static_cast<double>(a.seeds);
    if (a.reported) {
      const double n = static_cast<double>(a.reported);
      a.dist = dist / n;
      a.cost = cost / n;
      a.ind = ind / n;
    }
    rows.push_back(a);
  }
  return rows;
}

constexpr double kBoldTolerance = 0.005;

std::string Cell(double v, double best, bool maximize, int decimals, double scale) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v * scale);
  const bool bold = maximize ? v >= best - kBoldTolerance : v <= best + kBoldTolerance;
  return bold ? "**" + std::string(buf) + "**" : std::string(buf);
}

}  // namespace

std::string ResultsTableMarkdown(const ExperimentConfig& config, const ExperimentResult& result) {
  std::string s = "# " + std::string(WorldName(config.world)) + ", " + std::string(LabelFormName(config.labels.form)) +
                  " labels\n\nMeans over seeds " +
                  Join(config.seeds, [](std::uint64_t v) { return std::to_string(v); }, ", ") +
                  ". Acc in percent on the held-out set. Bold entries lie within " + Num(kBoldTolerance) +
                  " of the best value in their column.\n";
  for (RecourseScmKind kind : config.recourse_scm) {
    const auto rows = AggregateFor(config, result, kind);
    double best_acc = -INFINITY, best_dist = INFINITY, best_cost = INFINITY, best_ind = INFINITY;
    bool fallback = false;
    for (const auto& r : rows) {
      best_acc = std::max(best_acc, r.accuracy);
      if (std::isfinite(r.dist)) best_dist = std::min(best_dist, r.dist);
      if (std::isfinite(r.cost)) best_cost = std::min(best_cost, r.cost);
      if (std::isfinite(r.ind)) best_ind = std::min(best_ind, r.ind);
      fallback = fallback || r.dist_grid_fallback;
    }
    s += "\n## Recourse SCM: " + std::string(RecourseScmName(kind)) + "\n\n";
    s += "| Classifier | Acc | Δ_dist | Δ_cost | Δ_ind |\n|---|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
      s += "| " + r.classifier + (r.dist_grid_fallback ? " †" : "") + " | " +
           Cell(r.accuracy, best_acc, true, 1, 100.0) + " | " + Cell(r.dist, best_dist, false, 2, 1.0) + " | " +
           Cell(r.cost, best_cost, false, 2, 1.0) + " | " + Cell(r.ind, best_ind, false, 2, 1.0) + " |\n";
    }
    if (config.table_delta_dist == "margin")
      s += "\nΔ_dist is the group gap in mean distance to the decision boundary |f(x)|/||w||" +
           std::string(fallback ? "; † marks models without a margin, reported on the action grid instead" : "") +
           ".\n";
  }
  return s;
}

std::string ResultsTableCsv(const ExperimentConfig& config, const ExperimentResult& result) {
  std::string s = "recourse_scm,classifier,accuracy,delta_dist,delta_dist_unit,delta_cost,delta_ind,seeds,reported\n";
  for (RecourseScmKind kind : config.recourse_scm) {
    for (const auto& r : AggregateFor(config, result, kind)) {
      const bool margin = config.table_delta_dist == "margin" && !r.dist_grid_fallback;
      s += std::string(RecourseScmName(kind)) + ",\"" + r.classifier + "\"," + Num(r.accuracy) + ',' + Num(r.dist) + ',' + (margin ? "margin" : "grid") +
           ',' + Num(r.cost) + ',' + Num(r.ind) + ',' + std::to_string(r.seeds) + ',' + std::to_string(r.reported) +
           '\n';
    }
  }
  return s;
}

std::string ResultsCsv(const ExperimentResult& result) {
  std::string s =
      "recourse_scm,classifier,seed,accuracy,chosen,delta_dist,delta_dist_margin,delta_cost,delta_ind,"
      "validity_fraction,sampled,imf_infeasible,causal_infeasible,causal_invalid,twin_infeasible,twin_invalid,"
      "twin_pairs,note\n";
  for (const auto& c : result.cells) {
    s += std::string(RecourseScmName(c.scm)) + ",\"" + c.classifier + "\"," + std::to_string(c.seed) + ',' +
         Num(c.accuracy) + ',' + Csv(c.chosen) + ',';
    if (c.report) {
      const auto& r = *c.report;
      s += Num(r.delta_dist) + ',' + OptNum(r.delta_dist_margin) + ',' + Num(r.delta_cost) + ',' + Num(r.delta_ind) +
           ',' + OptNum(r.validity_fraction) + ',' + std::to_string(r.individuals.size()) + ',' +
           std::to_string(r.imf_infeasible) + ',' + std::to_string(r.causal_infeasible) + ',' +
           std::to_string(r.causal_invalid) + ',' + std::to_string(r.twin_infeasible) + ',' +
           std::to_string(r.twin_invalid) + ',' + std::to_string(r.twin_pairs) + ',';
    } else {
      s += ",,,,,,,,,,,,";
    }
    s += Csv(c.note) + '\n';
  }
  return s;
}

}  // namespace fairrec
