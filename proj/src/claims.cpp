#include "fairrec/claims.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "fairrec/classifiers.hpp"
#include "fairrec/error.hpp"
#include "fairrec/estimation.hpp"
#include "fairrec/experiment.hpp"
#include "fairrec/io.hpp"
#include "fairrec/metrics.hpp"
#include "fairrec/recourse.hpp"
#include "fairrec/rng.hpp"
#include "fairrec/societal.hpp"
#include "fairrec/worlds.hpp"

namespace fairrec {

namespace fs = std::filesystem;

namespace {

std::string Fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string Sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

ClaimResult Claim(int id, std::string name) {
  ClaimResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

ClassifierModel SignModel(const Scm& scm, double boundary) {
  ModelSpec spec;
  spec.label = "sgn(x - " + FormatDouble(boundary) + ")";
  spec.family = Family::kFixedLinear;
  spec.selector = SelectorMode::kXOnly;
  spec.fixed_weights = {1.0};
  spec.fixed_bias = -boundary;
  return Train(spec, scm, {}, 0);
}

MetricContext OneFeatureContext(const Scm& scm, const std::vector<Instance>& train, int bins, int workers) {
  MetricContext ctx;
  ctx.oracle = &scm;
  ctx.causal_space = ActionSpace::FromTraining(scm, train, scm.feature_indices(), bins);
  ctx.imf_space = ctx.causal_space;
  ctx.workers = workers;
  return ctx;
}

ExperimentConfig ProtocolConfig(World world, LabelForm labels, std::vector<std::uint64_t> seeds,
                                std::vector<std::string> classifiers, int workers) {
  ExperimentConfig c;
  c.world = world;
  c.labels.form = labels;
  c.seeds = std::move(seeds);
  c.classifiers = std::move(classifiers);
  c.workers = workers;
  return c;
}

// A classifier unfair to every individual with identical group means.
ClaimResult Prop1(const ClaimOptions& o) {
  ClaimResult r = Claim(1, "Group-fair but individually unfair recourse (PROP1-BERNOULLI, sgn(x-0.5), N=400)");
  const Scm scm = BuildWorld(World::kProp1Bernoulli);
  const auto data = SampleInstances(scm, 400, DeriveSeed(0, "prop1"));
  const ClassifierModel h = SignModel(scm, 0.5);
  const MetricContext ctx = OneFeatureContext(scm, data, 15, o.workers);
  const GroupPartition part = Partition(data, h, scm, 50, DeriveSeed(0, "partition"));
  const FairnessReport rep = EvaluateFairness(data, part, h, ctx);
  double step = 0.0;
  bool twins_positive = true;
  for (const auto& ind : rep.individuals) {
    const ActionGrid g = BuildGrid(ctx.causal_space, data[ind.index].values);
    step = std::max(step, g.values[0][1] - g.values[0][0]);
    for (std::size_t k = 0; k < ind.twin_positive.size(); ++k)
      if (scm.protected_domain()[k] != ind.group) twins_positive = twins_positive && ind.twin_positive[k];
  }
  r.met = rep.delta_dist == 0.0 && rep.delta_cost == 0.0 && std::abs(rep.delta_ind - 0.5) <= step &&
          twins_positive && !rep.individuals.empty();
  r.measured = "delta_dist=" + FormatDouble(rep.delta_dist) + " delta_cost=" + FormatDouble(rep.delta_cost) +
               " delta_ind=" + Fixed(rep.delta_ind) + " twins_positive=" + (twins_positive ? "all" : "not all") +
               " (" + std::to_string(rep.individuals.size()) + " individuals)";
  r.target = "delta_dist = 0, delta_cost = 0, delta_ind = 0.5, every twin positive";
  r.tolerance = "exact; delta_ind within one grid step (" + Fixed(step) + ")";
  r.budget_seconds = 5;
  return r;
}

// Counterfactual fairness does not bound the group gap.
ClaimResult Prop2(const ClaimOptions& o) {
  ClaimResult r = Claim(2, "Counterfactually fair classifier with unequal recourse (VARIANCE-EXAMPLE, sgn(x), N=10^4)");
  const Scm scm = BuildWorld(World::kVarianceExample);
  const auto data = SampleInstances(scm, 10000, DeriveSeed(0, "prop2"));
  const ClassifierModel h = SignModel(scm, 0.0);
  const CounterfactualFairness cf = CheckCounterfactualFairness(h, scm, data);
  // A fine grid so that grid distances resolve the distance to the boundary.
  const MetricContext ctx = OneFeatureContext(scm, data, 897, o.workers);
  const GroupPartition part = Partition(data, h, scm, std::nullopt, 0);
  const FairnessReport rep = EvaluateFairness(data, part, h, ctx);
  const auto& g = rep.groups;
  const std::size_t g0 = std::find(g.begin(), g.end(), 0.0) - g.begin();
  const std::size_t g1 = std::find(g.begin(), g.end(), 1.0) - g.begin();
  const double grid_ratio = rep.imf_group_mean[g0] / rep.imf_group_mean[g1];
  const double margin_ratio = rep.margin_group_mean[g0] / rep.margin_group_mean[g1];
  auto in = [](double v) { return v >= 1.8 && v <= 2.2; };
  r.met = cf.fair && cf.violations == 0 && in(grid_ratio) && in(margin_ratio) && rep.delta_ind > 0.3;
  r.measured = std::string("cf_fair=") + (cf.fair ? "yes" : "no") + " violations=" + std::to_string(cf.violations) +
               " ratio(grid)=" + Fixed(grid_ratio) + " ratio(|f|)=" + Fixed(margin_ratio) +
               " delta_ind=" + Fixed(rep.delta_ind);
  r.target = "counterfactually fair with 0 violations; mean distance ratio A=0/A=1 in [1.8, 2.2]; delta_ind > 0.3";
  r.tolerance = "ratio band as stated, on the 897-bin grid and on |f(x)|";
  r.budget_seconds = 30;
  return r;
}

// Classifiers that ignore descendants of A give individually fair recourse.
ClaimResult Prop3(const ClaimOptions& o) {
  ClaimResult r = Claim(3, "Non-descendant inputs give individually fair recourse (X_nd and X_nd,U_d on IMF, CAU-LIN, CAU-ANM, 3 seeds)");
  std::size_t runs = 0, zero = 0;
  double worst = 0.0;
  std::string failures;
  for (World w : {World::kImf, World::kCauLin, World::kCauAnm}) {
    const ExperimentConfig c = ProtocolConfig(w, LabelForm::kLinearLogistic, {0, 1, 2},
                                              {"LR(X_nd)", "LR(X_nd,U_d)", "SVM(X_nd)", "SVM(X_nd,U_d)"}, o.workers);
    for (const auto& cell : RunExperiment(c, false).cells) {
      ++runs;
      if (cell.report && cell.report->delta_ind == 0.0) {
        ++zero;
      } else {
        worst = std::max(worst, cell.report ? cell.report->delta_ind : INFINITY);
        failures += " " + std::string(WorldName(w)) + "/" + cell.classifier + "/seed" + std::to_string(cell.seed);
      }
    }
  }
  r.met = runs == 36 && zero == runs;
  r.measured = std::to_string(zero) + "/" + std::to_string(runs) + " runs with delta_ind = 0" +
               (failures.empty() ? "" : "; worst " + FormatDouble(worst) + " in" + failures);
  r.target = "delta_ind == 0 in every run";
  r.tolerance = "exact";
  r.budget_seconds = 600;
  return r;
}

// Accuracy of three LR variants on IMF with linear labels.
ClaimResult AccuracyTrends(const ClaimOptions& o) {
  ClaimResult r = Claim(4, "Accuracy trends (IMF, linear labels, N=500/3000, 5 seeds)");
  const std::vector<std::string> names = {"LR(X,A)", "LR(X_nd)", "LR(X_nd,U_d)"};
  const std::map<std::string, std::pair<double, double>> targets = {
      {"LR(X,A)", {86.7, 3.0}}, {"LR(X_nd)", {65.3, 4.0}}, {"LR(X_nd,U_d)", {86.7, 3.0}}};
  const ExperimentConfig c = ProtocolConfig(World::kImf, LabelForm::kLinearLogistic, {0, 1, 2, 3, 4}, names,
                                            o.workers);
  const Scm oracle = BuildWorld(c.world);
  std::map<std::string, double> mean;
  for (std::uint64_t seed : c.seeds) {
    const SeedData d = GenerateData(c, oracle, seed);
    for (const auto& n : names) mean[n] += 100.0 * TrainClassifier(c, oracle, d, n).accuracy / c.seeds.size();
  }
  r.met = true;
  for (const auto& n : names) {
    const auto [t, tol] = targets.at(n);
    r.met = r.met && std::abs(mean[n] - t) <= tol;
    r.measured += (r.measured.empty() ? "" : " ") + n + "=" + Fixed(mean[n], 2);
    r.target += (r.target.empty() ? "" : " ") + n + "=" + Fixed(t, 1);
    r.tolerance += (r.tolerance.empty() ? "" : " ") + std::string("+-") + Fixed(tol, 1);
  }
  r.budget_seconds = 300;
  return r;
}

// FairSVM reduces the group gap in distance to the boundary.
ClaimResult FairSvmEffect(const ClaimOptions& o) {
  ClaimResult r = Claim(5, "FairSVM effect (IMF, linear labels, 3 seeds)");
  const ExperimentConfig c =
      ProtocolConfig(World::kImf, LabelForm::kLinearLogistic, {0, 1, 2}, {"SVM(X,A)", "FairSVM(X,A)"}, o.workers);
  const Scm oracle = BuildWorld(c.world);
  bool all = true;
  for (std::uint64_t seed : c.seeds) {
    const SeedData d = GenerateData(c, oracle, seed);
    std::map<std::string, FairnessReport> rep;
    for (const auto& n : c.classifiers) {
      const TrainedClassifier t = TrainClassifier(c, oracle, d, n);
      const CellResult cell =
          EvaluateCell(c, oracle, nullptr, d, t, RecourseScmKind::kOracle, MetricRequest{true, false, false});
      if (!cell.report) throw Error(ErrorCode::kEmptyNegativeGroup, cell.note);
      rep[n] = *cell.report;
    }
    const double fm = *rep["FairSVM(X,A)"].delta_dist_margin, sm = *rep["SVM(X,A)"].delta_dist_margin;
    const double fg = rep["FairSVM(X,A)"].delta_dist, sg = rep["SVM(X,A)"].delta_dist;
    const bool ok = fm < 0.5 * sm && fg < 0.5 * sg;
    all = all && ok;
    r.measured += (r.measured.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) +
                  ": margin " + Fixed(fm, 3) + " vs " + Fixed(sm, 3) + ", grid " + Fixed(fg, 3) + " vs " +
                  Fixed(sg, 3) + (ok ? "" : " (not met)");
  }
  r.met = all;
  r.target = "FairSVM delta_dist < 0.5 x SVM(X,A) delta_dist on every seed, in margin units and on the grid";
  r.tolerance = "strict inequality";
  r.budget_seconds = 600;
  return r;
}

// Recourse searched under estimated SCMs, judged by the true SCM.
ClaimResult EstimatedScm(const ClaimOptions& o) {
  ClaimResult r = Claim(6, "Estimated-SCM validity (CAU-ANM, nonlinear labels, LR(X,A), KR tuned by 5-fold CV, 3 seeds)");
  ExperimentConfig c = ProtocolConfig(World::kCauAnm, LabelForm::kNonlinearLogistic, {0, 1, 2}, {"LR(X,A)"},
                                      o.workers);
  c.recourse_scm = {RecourseScmKind::kFittedKernelRidge, RecourseScmKind::kFittedLinear};
  // With unit-variance noise the default ridge of 1e-3 chases the noise; the
  // 5-fold RMSE grid picks the regularisation instead.
  c.kr_cv_ridge = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  c.kr_cv_bandwidth_scale = {0.25, 0.5, 1.0, 2.0};
  const Scm oracle = BuildWorld(c.world);
  bool kr_ok = true;
  int linear_lower = 0;
  for (std::uint64_t seed : c.seeds) {
    const SeedData d = GenerateData(c, oracle, seed);
    const TrainedClassifier t = TrainClassifier(c, oracle, d, "LR(X,A)");
    std::map<RecourseScmKind, double> validity;
    for (RecourseScmKind kind : c.recourse_scm) {
      const Scm fitted = FitRecourseScm(c, kind, d);
      const CellResult cell = EvaluateCell(c, oracle, &fitted, d, t, kind, MetricRequest{false, true, false});
      validity[kind] = cell.report && cell.report->validity_fraction ? *cell.report->validity_fraction : NAN;
    }
    const double kr = validity[RecourseScmKind::kFittedKernelRidge];
    const double lin = validity[RecourseScmKind::kFittedLinear];
    kr_ok = kr_ok && kr >= 0.9;
    linear_lower += lin < kr;
    r.measured += (r.measured.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": kernel-ridge " +
                  Fixed(kr, 3) + ", linear " + Fixed(lin, 3);
  }
  r.met = kr_ok && linear_lower >= 2;
  r.measured += "; linear lower on " + std::to_string(linear_lower) + "/3";
  r.target = "kernel-ridge validity >= 0.90 on every seed; linear strictly lower on >= 2 of 3 seeds";
  r.tolerance = "as stated";
  r.budget_seconds = 900;
  return r;
}

ClaimResult SocietalSweep(const ClaimOptions& o) {
  ClaimResult r = Claim(7, "Societal sweep (p=1, s=-2t, 41 thresholds in [-2,0], n=5000)");
  const Scm base = BuildWorld(World::kVarianceExample);
  const ClassifierModel h = SignModel(base, 0.0);
  std::vector<double> ts;
  for (int k = 0; k <= 40; ++k) ts.push_back(-2.0 + 2.0 * k / 40.0);
  const auto out = SweepPolicies(base, h, ts, 1.0, 5000, DeriveSeed(0, "societal"), o.workers);
  std::size_t best = 0;
  for (std::size_t k = 1; k < out.size(); ++k)
    if (out[k].benefit > out[best].benefit) best = k;
  const auto zero = std::find_if(out.begin(), out.end(), [](const PolicyOutcome& p) { return p.policy.t == 0.0; });
  bool cost_ok = true;
  for (const auto& p : out)
    if (std::abs(p.policy.t) > 1.5) cost_ok = cost_ok && out[best].cost > p.cost;
  const double t_best = out[best].policy.t;
  r.met = t_best >= -1.0 && t_best <= -0.5 && zero != out.end() && zero->benefit == 0.0 && cost_ok;
  r.measured = "argmax t=" + FormatDouble(t_best) + " (benefit " + Fixed(out[best].benefit) + ", cost " +
               Fixed(out[best].cost, 1) + "); benefit(t=0)=" +
               (zero == out.end() ? std::string("missing") : FormatDouble(zero->benefit)) +
               "; cost at argmax above every |t|>1.5 point: " + (cost_ok ? "yes" : "no");
  r.target = "argmax t in [-1.0, -0.5]; benefit(0) = 0; cost(argmax) > cost(t) for |t| > 1.5";
  r.tolerance = "exact";
  r.budget_seconds = 120;
  return r;
}

bool SameFiles(const fs::path& a, const fs::path& b, const std::vector<std::string>& files, std::string& diff) {
  for (const auto& f : files) {
    if (!fs::exists(b / f) || ReadFile(a / f) != ReadFile(b / f)) {
      diff = f;
      return false;
    }
  }
  return true;
}

ClaimResult Properties(const ClaimOptions& o) {
  ClaimResult r = Claim(8, "Property suites");
  std::vector<std::string> parts;
  bool ok = true;
  auto note = [&](const std::string& name, bool pass, const std::string& detail) {
    ok = ok && pass;
    parts.push_back(name + (pass ? " ok" : " FAILED") + (detail.empty() ? "" : " (" + detail + ")"));
  };

  const std::vector<World> worlds = {World::kImf, World::kCauLin, World::kCauAnm, World::kProp1Bernoulli,
                                     World::kVarianceExample};
  // Abduction round trip, identity counterfactual, non-descendant stability.
  double round_trip = 0.0;
  bool identity = true, stable = true;
  for (World w : worlds) {
    const Scm scm = BuildWorld(w);
    const auto data = SampleInstances(scm, 500, DeriveSeed(1, "properties"));
    const auto desc = scm.descendants(scm.protected_index(), true);
    for (const auto& v : data) {
      Instance bare = v;
      bare.exogenous.reset();
      const ExogenousVector u = Abduct(scm, bare);
      const Instance back = PushForward(scm, u);
      for (std::size_t i = 0; i < v.values.size(); ++i)
        round_trip = std::max(round_trip, std::abs(back.values[i] - v.values[i]));
      identity = identity && Counterfactual(scm, bare, Intervention{}).values == v.values;
      for (double a : scm.protected_domain()) {
        const Instance twin = CounterfactualTwin(scm, bare, a);
        for (std::size_t i = 0; i < v.values.size(); ++i)
          if (!desc[i]) stable = stable && twin.values[i] == v.values[i];
      }
    }
  }
  {
    const Scm scm = BuildWorld(World::kCauAnm);
    const auto train = SampleInstances(scm, 500, DeriveSeed(2, "properties"));
    const auto test = SampleInstances(scm, 200, DeriveSeed(3, "properties"));
    for (Regressor reg : {Regressor::kLinearRidge, Regressor::kKernelRidge}) {
      AnmFitConfig fit;
      fit.regressor = reg;
      fit.workers = o.workers;
      const Scm fitted = FitAnm(train, scm.graph(), fit);
      for (const auto& v : test) {
        Instance bare = v;
        bare.exogenous.reset();
        const Instance back = PushForward(fitted, ResidualAbduct(fitted, bare));
        for (std::size_t i = 0; i < v.values.size(); ++i)
          round_trip = std::max(round_trip, std::abs(back.values[i] - v.values[i]));
        identity = identity && Counterfactual(fitted, bare, Intervention{}).values == v.values;
      }
    }
  }
  note("abduction round trip", round_trip <= 1e-10, "max error " + Sci(round_trip));
  note("identity counterfactual", identity, "");
  note("non-descendant stability", stable, "");

  if (o.solver_equivalence) {
    const EquivalenceSummary eq = o.solver_equivalence();
    note("solver vs exhaustive oracle", eq.cases > 0 && eq.mismatches == 0,
         std::to_string(eq.cases - eq.mismatches) + "/" + std::to_string(eq.cases) + " identical" +
             (eq.first_mismatch.empty() ? "" : "; first mismatch " + eq.first_mismatch));
  } else {
    note("solver vs exhaustive oracle", false, "not run: no reference solver supplied");
  }

  {
    const Scm scm = BuildWorld(World::kImf);
    const auto train = SampleInstances(scm, 300, DeriveSeed(4, "properties"));
    const auto people = SampleInstances(scm, 200, DeriveSeed(5, "properties"));
    const ActionSpace space = ActionSpace::FromTraining(scm, train, scm.feature_indices());
    CounterRng rng(DeriveSeed(6, "properties"), StreamId("models"));
    std::size_t same = 0, total = 0;
    for (const auto& v : people) {
      ModelSpec spec;
      spec.family = Family::kFixedLinear;
      spec.selector = SelectorMode::kXOnly;
      for (int k = 0; k < 3; ++k) spec.fixed_weights.push_back(rng.Gaussian());
      spec.fixed_bias = rng.Gaussian();
      const ClassifierModel h = Train(spec, scm, {}, 0);
      for (CostKind k : {CostKind::kL2Intervention, CostKind::kL2Endpoint}) {
        const RecourseResult c = SolveCausalRecourse(v, h, scm, space, k);
        const RecourseResult i = SolveImfRecourse(v, h, space, k);
        ++total;
        same += c.found == i.found && (!c.found || c.cost == i.cost);
      }
    }
    note("IMF/causal collapse", same == total, std::to_string(same) + "/" + std::to_string(total));
  }

  {
    double worst = 0.0;
    std::string detail;
    for (const auto& g : CheckGradients(100, DeriveSeed(7, "properties"))) {
      worst = std::max(worst, g.worst_relative_error);
      detail += (detail.empty() ? "" : ", ") + g.objective + " " + Sci(g.worst_relative_error);
    }
    note("gradients", worst < 1e-5, detail);
  }

  {
    ExperimentConfig c = ProtocolConfig(World::kCauLin, LabelForm::kLinearLogistic, {0, 1},
                                        {"LR(X,A)", "SVM(X_nd)", "FairSVM(X,A)"}, 1);
    c.n_train = 200;
    c.n_test = 400;
    c.fairsvm_lambda = {0.5, 10.0};
    c.svm_C = {1.0, 10.0};
    c.negatives_per_group = 20;
    c.recourse_scm = {RecourseScmKind::kOracle, RecourseScmKind::kFittedLinear, RecourseScmKind::kFittedKernelRidge};
    const fs::path a = o.scratch / "run_a", b = o.scratch / "run_b";
    std::error_code ec;
    fs::remove_all(a, ec);
    fs::remove_all(b, ec);
    c.out = a;
    const ExperimentResult ra = RunExperiment(c);
    c.out = b;
    c.workers = std::max(2, o.workers);
    const ExperimentResult rb = RunExperiment(c);
    std::string diff;
    const bool same = ra.hash == rb.hash && ra.files == rb.files && SameFiles(a, b, ra.files, diff);
    note("pipeline byte-determinism", same,
         std::to_string(ra.files.size()) + " files, workers 1 vs " + std::to_string(c.workers) +
             (diff.empty() ? "" : "; differs: " + diff));
  }

  for (const auto& p : parts) r.measured += (r.measured.empty() ? "" : "; ") + p;
  r.met = ok;
  r.target = "round trip <= 1e-10; exact identity, stability, oracle match, collapse; gradient rel. err < 1e-5; "
             "identical outputs across runs and worker counts";
  r.tolerance = "as stated";
  r.budget_seconds = 300;
  return r;
}

// Central differences at h and h/2; a point is kept only where they agree,
// i.e. where no kink of the objective lies within reach of the stencil.
template <class Obj>
GradientCheck CheckOne(const std::string& name, std::size_t dim, std::size_t points, CounterRng& rng, Obj obj,
                       double scale) {
  GradientCheck g;
  g.objective = name;
  std::vector<double> p(dim), grad;
  constexpr double h = 1e-6;
  std::size_t attempts = 0;
  while (g.points < points && attempts < 50 * points) {
    ++attempts;
    for (auto& v : p) v = scale * rng.Gaussian();
    obj(p, &grad);
    std::vector<double> fd(dim), fd_half(dim);
    bool smooth = true;
    for (std::size_t k = 0; k < dim && smooth; ++k) {
      const double keep = p[k];
      auto central = [&](double step) {
        p[k] = keep + step;
        const double up = obj(p, nullptr);
        p[k] = keep - step;
        const double down = obj(p, nullptr);
        p[k] = keep;
        return (up - down) / (2 * step);
      };
      fd[k] = central(h);
      fd_half[k] = central(h / 2);
      smooth = std::abs(fd[k] - fd_half[k]) <= 1e-7 * std::max(1.0, std::abs(fd[k]));
    }
    if (!smooth) continue;
    double num = 0, ng = 0, nf = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      num += (grad[k] - fd[k]) * (grad[k] - fd[k]);
      ng += grad[k] * grad[k];
      nf += fd[k] * fd[k];
    }
    const double denom = std::sqrt(std::max(ng, nf));
    g.worst_relative_error = std::max(g.worst_relative_error, denom > 0 ? std::sqrt(num) / denom : 0.0);
    ++g.points;
  }
  if (g.points < points) g.worst_relative_error = INFINITY;
  return g;
}

std::string FormatSeconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), s < 10 ? "%.2f" : "%.0f", s);
  return buf;
}

}  // namespace

std::vector<GradientCheck> CheckGradients(std::size_t points, std::uint64_t seed) {
  const Scm scm = BuildWorld(World::kImf);
  LabelModel labels;
  const auto data = GenerateLabels(scm, SampleInstances(scm, 200, seed), labels, seed + 1);
  const FeatureSelector sel = FeatureSelector::Resolve(SelectorMode::kXAndA, scm);
  const LabeledMatrix m = BuildMatrix(sel, scm, data);
  LabeledMatrix m2 = m;
  m2.dim = PolynomialFeatureCount(m.dim, 2);
  m2.x.assign(m.rows * m2.dim, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r)
    PolynomialFeatures(std::span<const double>(m.x.data() + r * m.dim, m.dim), 2, m2.x.data() + r * m2.dim);

  std::vector<DenseLayer> shape;
  std::size_t in = m.dim, n_mlp = 0;
  for (int width : {10, 10, 1}) {
    DenseLayer l;
    l.in = in;
    l.out = static_cast<std::size_t>(width);
    l.weights.assign(l.in * l.out, 0.0);
    l.bias.assign(l.out, 0.0);
    n_mlp += l.in * l.out + l.out;
    in = l.out;
    shape.push_back(l);
  }

  CounterRng rng(seed, StreamId("gradient-check"));
  std::vector<GradientCheck> out;
  out.push_back(CheckOne("log-loss", m.dim + 1, points, rng,
                         [&](std::span<const double> p, std::vector<double>* g) { return objective::LogLoss(p, m, g); },
                         1.0));
  out.push_back(CheckOne("hinge", m.dim + 1, points, rng,
                         [&](std::span<const double> p, std::vector<double>* g) {
                           return objective::Hinge(p, m, 10.0, g);
                         },
                         1.0));
  out.push_back(CheckOne("hinge (degree 2)", m2.dim + 1, points, rng,
                         [&](std::span<const double> p, std::vector<double>* g) {
                           return objective::Hinge(p, m2, 1.0, g);
                         },
                         0.5));
  out.push_back(CheckOne("fair hinge", m.dim + 1, points, rng,
                         [&](std::span<const double> p, std::vector<double>* g) {
                           return objective::FairHinge(p, m, 10.0, 2.0, g);
                         },
                         1.0));
  out.push_back(CheckOne("mlp log-loss", n_mlp, points, rng,
                         [&](std::span<const double> p, std::vector<double>* g) {
                           return objective::MlpLogLoss(p, shape, m, g);
                         },
                         0.5));
  return out;
}

std::string FormatClaim(const ClaimResult& r) {
  std::string verdict = r.pass() ? "[PASS]" : "[FAIL]";
  std::string s = verdict + " " + std::to_string(r.id) + " " + r.name + " | measured: " + r.measured +
                  " | target: " + r.target + " | tolerance: " + r.tolerance + " | " + FormatSeconds(r.seconds) +
                  " s (budget " + FormatSeconds(r.budget_seconds) + " s)";
  if (r.met && !r.pass()) s += " over budget";
  return s;
}

std::vector<ClaimResult> ReproduceClaims(const ClaimOptions& options,
                                         const std::function<void(const ClaimResult&)>& report) {
  using Fn = ClaimResult (*)(const ClaimOptions&);
  const std::vector<std::pair<int, Fn>> suite = {{1, Prop1},        {2, Prop2},        {3, Prop3},
                                                 {4, AccuracyTrends}, {5, FairSvmEffect}, {6, EstimatedScm},
                                                 {7, SocietalSweep}, {8, Properties}};
  std::vector<ClaimResult> results;
  for (const auto& [id, fn] : suite) {
    if (!options.only.empty() && !options.only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    ClaimResult r;
    try {
      r = fn(options);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "claim " + std::to_string(id);
      r.measured = std::string("error: ") + e.what();
      r.met = false;
      r.budget_seconds = 0;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (report) report(r);
    results.push_back(r);
  }
  return results;
}

}  // namespace fairrec
