#include "fairrec/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairrec/error.hpp"
#include "fairrec/io.hpp"
#include "fairrec/simd/kernels.hpp"

namespace fairrec {

std::string_view SelectorModeName(SelectorMode mode) {
  switch (mode) {
    case SelectorMode::kXAndA: return "X-and-A";
    case SelectorMode::kXOnly: return "X-only";
    case SelectorMode::kNondescendants: return "nondescendants-only";
    case SelectorMode::kNondescendantsPlusExogenous: return "nondescendants-plus-exogenous";
  }
  return "?";
}

SelectorMode ParseSelectorMode(std::string_view name) {
  for (SelectorMode m : {SelectorMode::kXAndA, SelectorMode::kXOnly, SelectorMode::kNondescendants,
                         SelectorMode::kNondescendantsPlusExogenous}) {
    if (SelectorModeName(m) == name) return m;
  }
  throw Error(ErrorCode::kParseError, "unknown selector '" + std::string(name) + "'");
}

std::string_view FamilyName(Family family) {
  switch (family) {
    case Family::kLogisticLinear: return "logistic-linear";
    case Family::kLogisticMlp: return "logistic-mlp";
    case Family::kSvm: return "svm";
    case Family::kFairSvm: return "fair-svm";
    case Family::kFixedLinear: return "fixed-linear";
  }
  return "?";
}

Family ParseFamily(std::string_view name) {
  for (Family f : {Family::kLogisticLinear, Family::kLogisticMlp, Family::kSvm, Family::kFairSvm,
                   Family::kFixedLinear}) {
    if (FamilyName(f) == name) return f;
  }
  throw Error(ErrorCode::kParseError, "unknown model family '" + std::string(name) + "'");
}

FeatureSelector FeatureSelector::Resolve(SelectorMode mode, const Scm& scm) {
  FeatureSelector s;
  s.mode = mode;
  const std::size_t a = scm.protected_index();
  const auto desc = scm.descendants(a, true);
  for (std::size_t i = 0; i < scm.num_endogenous(); ++i) {
    const auto kind = scm.variable(i).kind;
    bool take = false;
    switch (mode) {
      case SelectorMode::kXAndA: take = kind == VariableKind::kFeature || i == a; break;
      case SelectorMode::kXOnly: take = kind == VariableKind::kFeature; break;
      case SelectorMode::kNondescendants:
      case SelectorMode::kNondescendantsPlusExogenous:
        take = kind == VariableKind::kFeature && !desc[i];
        break;
    }
    if (take) {
      s.endogenous.push_back(i);
      s.names.push_back(scm.variable(i).name);
    }
  }
  if (mode == SelectorMode::kNondescendantsPlusExogenous) {
    std::vector<bool> noise_of_desc(scm.num_exogenous(), false);
    for (std::size_t i = 0; i < scm.num_endogenous(); ++i) {
      const auto kind = scm.variable(i).kind;
      if (desc[i] && (kind == VariableKind::kFeature || i == a) && scm.equation(i).noise)
        noise_of_desc[*scm.equation(i).noise] = true;
    }
    for (std::size_t j = 0; j < scm.num_exogenous(); ++j) {
      if (noise_of_desc[j]) {
        s.exogenous.push_back(j);
        s.names.push_back(scm.exogenous(j).name);
      }
    }
  }
  if (s.dim() == 0) throw Error(ErrorCode::kInvalidArgument, "selector reads no inputs");
  return s;
}

void FeatureSelector::Extract(std::span<const double> values, std::span<const double> u,
                              double* out) const {
  std::size_t k = 0;
  for (std::size_t i : endogenous) {
    if (i >= values.size()) throw Error(ErrorCode::kMissingVariable, "instance lacks input " + names[k]);
    out[k++] = values[i];
  }
  for (std::size_t j : exogenous) {
    if (j >= u.size()) throw Error(ErrorCode::kMissingVariable, "instance lacks exogenous input " + names[k]);
    out[k++] = u[j];
  }
}

// ---------------------------------------------------------------------------
// Polynomial feature map

namespace {

void EmitMonomials(std::span<const double> x, std::size_t start, int remaining, double prod,
                   double*& out) {
  if (remaining == 0) {
    *out++ = prod;
    return;
  }
  for (std::size_t i = start; i < x.size(); ++i) EmitMonomials(x, i, remaining - 1, prod * x[i], out);
}

std::size_t Choose(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int MapDegree(const ModelSpec& spec) {
  return spec.family == Family::kSvm || spec.family == Family::kFairSvm ? spec.degree : 1;
}

}  // namespace

std::size_t PolynomialFeatureCount(std::size_t dim, int degree) {
  std::size_t n = 0;
  for (int d = 1; d <= degree; ++d) n += Choose(dim + d - 1, d);
  return n;
}

void PolynomialFeatures(std::span<const double> x, int degree, double* out) {
  if (degree == 1) {
    std::copy(x.begin(), x.end(), out);
    return;
  }
  for (int d = 1; d <= degree; ++d) EmitMonomials(x, 0, d, 1.0, out);
}

std::string ClassifierModel::FeatureMapDescription() const {
  const std::string inputs = [&] {
    std::string s;
    for (const auto& n : selector.names) s += (s.empty() ? "" : ", ") + n;
    return s;
  }();
  switch (spec.family) {
    case Family::kLogisticMlp: {
      std::string s = "mlp over (" + inputs + "), hidden";
      for (int h : spec.hidden) s += ' ' + std::to_string(h);
      return s + ", relu";
    }
    default: {
      const int deg = MapDegree(spec);
      if (deg == 1) return "identity over (" + inputs + ")";
      return "monomials of degree 1.." + std::to_string(deg) + " over (" + inputs + "), " +
             std::to_string(PolynomialFeatureCount(selector.dim(), deg)) + " features";
    }
  }
}

// ---------------------------------------------------------------------------

LabeledMatrix BuildMatrix(const FeatureSelector& selector, const Scm& scm,
                          const std::vector<Instance>& data) {
  LabeledMatrix m;
  m.rows = data.size();
  m.dim = selector.dim();
  m.x.resize(m.rows * m.dim);
  m.y.resize(m.rows);
  m.group.resize(m.rows);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto& v = data[r];
    if (!v.label) throw Error(ErrorCode::kMissingVariable, "training instance without a label");
    ExogenousVector abducted;
    std::span<const double> u;
    if (selector.reads_exogenous()) {
      if (v.exogenous) {
        u = *v.exogenous;
      } else {
        abducted = Abduct(scm, v);
        u = abducted;
      }
    }
    selector.Extract(v.values, u, m.x.data() + r * m.dim);
    m.y[r] = *v.label;
    m.group[r] = v.values.at(scm.protected_index());
  }
  return m;
}

namespace {

LabeledMatrix MapMatrix(const LabeledMatrix& m, int degree) {
  if (degree == 1) return m;
  LabeledMatrix out;
  out.rows = m.rows;
  out.dim = PolynomialFeatureCount(m.dim, degree);
  out.x.resize(out.rows * out.dim);
  for (std::size_t r = 0; r < m.rows; ++r) {
    PolynomialFeatures(std::span<const double>(m.x.data() + r * m.dim, m.dim), degree,
                       out.x.data() + r * out.dim);
  }
  out.y = m.y;
  out.group = m.group;
  return out;
}

double Log1pExp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Norm(std::span<const double> v) {
  return std::sqrt(simd::Active().dot(v.data(), v.data(), v.size()));
}

void Scores(const LabeledMatrix& m, std::span<const double> params, std::vector<double>& f) {
  f.resize(m.rows);
  simd::Active().affine_rows(m.x.data(), m.rows, m.dim, params.data(), params[m.dim], f.data());
}

}  // namespace

// ---------------------------------------------------------------------------
// Objectives

namespace objective {

double LogLoss(std::span<const double> params, const LabeledMatrix& m, std::vector<double>* grad) {
  std::vector<double> f;
  Scores(m, params, f);
  double loss = 0.0;
  std::vector<double> coef(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double margin = m.y[i] * f[i];
    loss += Log1pExp(-margin);
    coef[i] = -m.y[i] * Sigmoid(-margin) / static_cast<double>(m.rows);
  }
  loss /= static_cast<double>(m.rows);
  if (grad) {
    grad->assign(m.dim + 1, 0.0);
    simd::Active().accumulate_rows(coef.data(), m.x.data(), m.rows, m.dim, grad->data());
    (*grad)[m.dim] = std::accumulate(coef.begin(), coef.end(), 0.0);
  }
  return loss;
}

double Hinge(std::span<const double> params, const LabeledMatrix& m, double C,
             std::vector<double>* grad) {
  std::vector<double> f;
  Scores(m, params, f);
  const std::span<const double> w = params.first(m.dim);
  double hinge = 0.0;
  std::vector<double> coef(m.rows, 0.0);
  const double scale = C / static_cast<double>(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double slack = 1.0 - m.y[i] * f[i];
    if (slack > 0.0) {
      hinge += slack;
      coef[i] = -m.y[i] * scale;
    }
  }
  const double ww = simd::Active().dot(w.data(), w.data(), w.size());
  if (grad) {
    grad->assign(w.begin(), w.end());
    grad->push_back(0.0);
    simd::Active().accumulate_rows(coef.data(), m.x.data(), m.rows, m.dim, grad->data());
    (*grad)[m.dim] = std::accumulate(coef.begin(), coef.end(), 0.0);
  }
  return 0.5 * ww + scale * hinge;
}

namespace {

struct GapTerms {
  double gap = 0.0;
  // Groups achieving the max and min mean distance; -1 if undefined.
  int hi = -1;
  int lo = -1;
  std::vector<double> group_values;
  std::vector<double> mean;
  std::vector<std::size_t> count;
};

GapTerms ComputeGap(const LabeledMatrix& m, const std::vector<double>& f, double wnorm) {
  GapTerms t;
  for (double g : m.group) {
    if (std::find(t.group_values.begin(), t.group_values.end(), g) == t.group_values.end())
      t.group_values.push_back(g);
  }
  std::sort(t.group_values.begin(), t.group_values.end());
  t.mean.assign(t.group_values.size(), 0.0);
  t.count.assign(t.group_values.size(), 0);
  if (wnorm == 0.0) return t;
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (f[i] > 0.0) continue;
    const auto k = static_cast<std::size_t>(
        std::lower_bound(t.group_values.begin(), t.group_values.end(), m.group[i]) - t.group_values.begin());
    t.mean[k] += -f[i] / wnorm;
    t.count[k] += 1;
  }
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < t.mean.size(); ++k) {
    if (t.count[k] == 0) continue;
    t.mean[k] /= static_cast<double>(t.count[k]);
    if (t.mean[k] > hi) { hi = t.mean[k]; t.hi = static_cast<int>(k); }
    if (t.mean[k] < lo) { lo = t.mean[k]; t.lo = static_cast<int>(k); }
  }
  if (t.hi >= 0 && t.lo >= 0 && t.hi != t.lo) t.gap = hi - lo;
  return t;
}

}  // namespace

double DistanceGap(std::span<const double> params, const LabeledMatrix& m) {
  std::vector<double> f;
  Scores(m, params, f);
  return ComputeGap(m, f, Norm(params.first(m.dim))).gap;
}

double FairHinge(std::span<const double> params, const LabeledMatrix& m, double C, double lambda,
                 std::vector<double>* grad) {
  double obj = Hinge(params, m, C, grad);
  if (lambda == 0.0) return obj;
  std::vector<double> f;
  Scores(m, params, f);
  const std::span<const double> w = params.first(m.dim);
  const double wnorm = Norm(w);
  const GapTerms t = ComputeGap(m, f, wnorm);
  obj += lambda * t.gap;
  if (grad && t.gap > 0.0) {
    // d/dtheta of mean_{i in G, f_i <= 0} (-f_i / ||w||):
    //   w:  -(mean phi_i) / ||w|| + (mean f_i) w / ||w||^3
    //   b:  -1 / ||w||
    std::vector<double> coef(m.rows, 0.0);
    double mean_f_hi = 0.0, mean_f_lo = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (f[i] > 0.0) continue;
      const bool in_hi = m.group[i] == t.group_values[t.hi];
      const bool in_lo = m.group[i] == t.group_values[t.lo];
      if (in_hi) {
        coef[i] = -lambda / (wnorm * static_cast<double>(t.count[t.hi]));
        mean_f_hi += f[i] / static_cast<double>(t.count[t.hi]);
      } else if (in_lo) {
        coef[i] = lambda / (wnorm * static_cast<double>(t.count[t.lo]));
        mean_f_lo += f[i] / static_cast<double>(t.count[t.lo]);
      }
    }
    simd::Active().accumulate_rows(coef.data(), m.x.data(), m.rows, m.dim, grad->data());
    const double radial = lambda * (mean_f_hi - mean_f_lo) / (wnorm * wnorm * wnorm);
    for (std::size_t k = 0; k < m.dim; ++k) (*grad)[k] += radial * w[k];
    (*grad)[m.dim] += std::accumulate(coef.begin(), coef.end(), 0.0);
  }
  return obj;
}

}  // namespace objective

// ---------------------------------------------------------------------------
// MLP

namespace {

std::vector<DenseLayer> MlpShape(std::size_t input_dim, const std::vector<int>& hidden) {
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  for (int h : hidden) {
    if (h <= 0) throw Error(ErrorCode::kInvalidArgument, "hidden layer widths must be positive");
    layers.push_back({in, static_cast<std::size_t>(h), {}, {}});
    in = static_cast<std::size_t>(h);
  }
  layers.push_back({in, 1, {}, {}});
  return layers;
}

void Unpack(std::span<const double> params, std::vector<DenseLayer>& layers) {
  std::size_t k = 0;
  for (auto& l : layers) {
    l.weights.assign(params.begin() + k, params.begin() + k + l.in * l.out);
    k += l.in * l.out;
    l.bias.assign(params.begin() + k, params.begin() + k + l.out);
    k += l.out;
  }
}

std::vector<double> Pack(const std::vector<DenseLayer>& layers) {
  std::vector<double> p;
  for (const auto& l : layers) {
    p.insert(p.end(), l.weights.begin(), l.weights.end());
    p.insert(p.end(), l.bias.begin(), l.bias.end());
  }
  return p;
}

double MlpForward(const std::vector<DenseLayer>& layers, std::span<const double> x,
                  std::vector<std::vector<double>>* activations) {
  std::vector<double> cur(x.begin(), x.end());
  if (activations) activations->assign(1, cur);
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& l = layers[li];
    std::vector<double> next(l.out);
    simd::Active().affine_rows(l.weights.data(), l.out, l.in, cur.data(), 0.0, next.data());
    const bool last = li + 1 == layers.size();
    for (std::size_t o = 0; o < l.out; ++o) {
      next[o] += l.bias[o];
      if (!last) next[o] = std::max(0.0, next[o]);
    }
    cur = std::move(next);
    if (activations) activations->push_back(cur);
  }
  return cur[0];
}

}  // namespace

namespace objective {

double MlpLogLoss(std::span<const double> params, const std::vector<DenseLayer>& shape,
                  const LabeledMatrix& m, std::vector<double>* grad) {
  std::vector<DenseLayer> layers = shape;
  Unpack(params, layers);
  if (grad) grad->assign(params.size(), 0.0);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(m.rows);
  std::vector<std::vector<double>> acts;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double f = MlpForward(layers, std::span<const double>(m.x.data() + r * m.dim, m.dim),
                                grad ? &acts : nullptr);
    const double margin = m.y[r] * f;
    loss += Log1pExp(-margin);
    if (!grad) continue;
    std::vector<double> delta = {-m.y[r] * Sigmoid(-margin) * inv_n};
    // Walk layers backwards; offsets locate each layer's block in params.
    std::size_t offset = params.size();
    for (std::size_t li = layers.size(); li-- > 0;) {
      const auto& l = layers[li];
      offset -= l.in * l.out + l.out;
      const auto& input = acts[li];
      double* gw = grad->data() + offset;
      double* gb = gw + l.in * l.out;
      for (std::size_t o = 0; o < l.out; ++o) {
        gb[o] += delta[o];
        for (std::size_t k = 0; k < l.in; ++k) gw[o * l.in + k] += delta[o] * input[k];
      }
      if (li == 0) break;
      std::vector<double> prev(l.in, 0.0);
      simd::Active().accumulate_rows(delta.data(), l.weights.data(), l.out, l.in, prev.data());
      for (std::size_t k = 0; k < l.in; ++k) {
        if (input[k] <= 0.0) prev[k] = 0.0;
      }
      delta = std::move(prev);
    }
  }
  return loss * inv_n;
}

}  // namespace objective

// ---------------------------------------------------------------------------
// Training

namespace {

void RequireTrainable(const LabeledMatrix& m, const ModelSpec& spec) {
  if (m.rows < 20) throw Error(ErrorCode::kDegenerateData, "need at least 20 training instances");
  const bool pos = std::any_of(m.y.begin(), m.y.end(), [](double y) { return y > 0; });
  const bool neg = std::any_of(m.y.begin(), m.y.end(), [](double y) { return y < 0; });
  if (!pos || !neg) throw Error(ErrorCode::kDegenerateData, "training labels contain a single class");
  if (spec.family == Family::kFairSvm) {
    std::vector<double> groups(m.group);
    std::sort(groups.begin(), groups.end());
    if (std::unique(groups.begin(), groups.end()) - groups.begin() < 2)
      throw Error(ErrorCode::kDegenerateData, "fair-svm needs at least two protected groups");
  }
}

// Gradient descent with Armijo backtracking.
std::vector<double> MinimizeLogLoss(const LabeledMatrix& m) {
  std::vector<double> params(m.dim + 1, 0.0);
  std::vector<double> grad, trial_grad;
  double loss = objective::LogLoss(params, m, &grad);
  const double initial = loss;
  double step = 1.0;
  constexpr int kMaxIterations = 5000;
  constexpr int kPatience = 200;
  int since_improvement = 0;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double gg = std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0);
    if (gg < 1e-16) break;
    std::vector<double> trial(params.size());
    step = std::min(step * 2.0, 1e3);
    double trial_loss = 0.0;
    while (true) {
      for (std::size_t k = 0; k < params.size(); ++k) trial[k] = params[k] - step * grad[k];
      trial_loss = objective::LogLoss(trial, m, &trial_grad);
      if (trial_loss <= loss - 1e-4 * step * gg) break;
      step *= 0.5;
      if (step < 1e-20) break;
    }
    if (step < 1e-20) break;  // numerically stationary
    since_improvement = trial_loss < loss - 1e-15 ? 0 : since_improvement + 1;
    params.swap(trial);
    grad.swap(trial_grad);
    loss = trial_loss;
    if (since_improvement > kPatience) break;
  }
  if (!std::isfinite(loss) || loss > initial)
    throw Error(ErrorCode::kNonConvergence, "logistic loss failed to decrease");
  return params;
}

// Full-batch subgradient descent on a 1-strongly-convex (in w) objective with
// step 1/(t+1); returns the best iterate seen, or the tail average if better.
// Iterates with w == 0 are never returned: margin distances are undefined there.
template <typename Objective>
std::vector<double> MinimizeSubgradient(std::size_t n_params, int iterations, Objective&& obj) {
  std::vector<double> params(n_params, 0.0);
  std::vector<double> grad;
  std::vector<double> best = params;
  double best_value = std::numeric_limits<double>::infinity();
  auto admissible = [&](const std::vector<double>& p) {
    return std::any_of(p.begin(), p.end() - 1, [](double x) { return x != 0.0; });
  };
  std::vector<double> avg(n_params, 0.0);
  int avg_count = 0;
  for (int t = 0; t < iterations; ++t) {
    const double value = obj(params, &grad);
    if (!std::isfinite(value)) throw Error(ErrorCode::kNonConvergence, "objective diverged");
    if (value < best_value && admissible(params)) {
      best_value = value;
      best = params;
    }
    const double step = 1.0 / (t + 1.0);
    for (std::size_t k = 0; k < n_params; ++k) params[k] -= step * grad[k];
    if (t >= iterations / 2) {
      ++avg_count;
      for (std::size_t k = 0; k < n_params; ++k) avg[k] += (params[k] - avg[k]) / avg_count;
    }
  }
  if (admissible(params) && obj(params, nullptr) < best_value) {
    best_value = obj(params, nullptr);
    best = params;
  }
  if (avg_count > 0 && admissible(avg) && obj(avg, nullptr) < best_value) best = avg;
  return best;
}

std::vector<DenseLayer> TrainMlp(const ModelSpec& spec, const LabeledMatrix& m, std::uint64_t seed) {
  std::vector<DenseLayer> layers = MlpShape(m.dim, spec.hidden);
  CounterRng init(seed, StreamId("mlp-init"));
  for (auto& l : layers) {
    const double sd = std::sqrt(2.0 / static_cast<double>(l.in));
    l.weights.resize(l.in * l.out);
    for (auto& w : l.weights) w = sd * init.Gaussian();
    l.bias.assign(l.out, 0.0);
  }
  // 10% validation split for early stopping.
  std::vector<std::size_t> order(m.rows);
  std::iota(order.begin(), order.end(), 0);
  CounterRng shuffle(seed, StreamId("mlp-split"));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.Below(i)]);
  const std::size_t n_val = std::max<std::size_t>(1, m.rows / 10);
  LabeledMatrix train, val;
  for (auto* part : {&train, &val}) {
    part->dim = m.dim;
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    LabeledMatrix& part = k < n_val ? val : train;
    const std::size_t r = order[k];
    part.x.insert(part.x.end(), m.x.begin() + r * m.dim, m.x.begin() + (r + 1) * m.dim);
    part.y.push_back(m.y[r]);
    part.group.push_back(m.group[r]);
    ++part.rows;
  }

  std::vector<double> params = Pack(layers);
  std::vector<double> best = params;
  double best_val = objective::MlpLogLoss(params, layers, val, nullptr);
  std::vector<double> grad;
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  constexpr int kPatience = 200;
  int since_best = 0;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    const double loss = objective::MlpLogLoss(params, layers, train, &grad);
    if (!std::isfinite(loss)) throw Error(ErrorCode::kNonConvergence, "mlp loss diverged");
    if (spec.mlp_optimizer == MlpOptimizer::kAdam) {
      const double c1 = 1.0 - std::pow(kBeta1, epoch + 1);
      const double c2 = 1.0 - std::pow(kBeta2, epoch + 1);
      for (std::size_t k = 0; k < params.size(); ++k) {
        m1[k] = kBeta1 * m1[k] + (1 - kBeta1) * grad[k];
        m2[k] = kBeta2 * m2[k] + (1 - kBeta2) * grad[k] * grad[k];
        params[k] -= spec.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + kEps);
      }
    } else {
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= spec.learning_rate * grad[k];
    }
    const double v = objective::MlpLogLoss(params, layers, val, nullptr);
    if (v < best_val) {
      best_val = v;
      best = params;
      since_best = 0;
    } else if (++since_best > kPatience) {
      break;
    }
  }
  Unpack(best, layers);
  return layers;
}

}  // namespace

ClassifierModel TrainOnMatrix(const ModelSpec& spec, const FeatureSelector& selector,
                              const LabeledMatrix& raw, std::uint64_t seed) {
  ClassifierModel model;
  model.spec = spec;
  model.selector = selector;
  if (raw.dim != selector.dim())
    throw Error(ErrorCode::kInvalidArgument, "design matrix width does not match selector");
  if (spec.family == Family::kFixedLinear) {
    if (spec.fixed_weights.size() != selector.dim())
      throw Error(ErrorCode::kInvalidArgument, "fixed weights do not match selector width");
    model.w = spec.fixed_weights;
    model.b = spec.fixed_bias;
    return model;
  }
  RequireTrainable(raw, spec);
  switch (spec.family) {
    case Family::kLogisticLinear: {
      const auto p = MinimizeLogLoss(raw);
      model.w.assign(p.begin(), p.end() - 1);
      model.b = p.back();
      break;
    }
    case Family::kLogisticMlp:
      model.layers = TrainMlp(spec, raw, seed);
      break;
    case Family::kSvm:
    case Family::kFairSvm: {
      if (spec.degree < 1 || spec.degree > 3)
        throw Error(ErrorCode::kInvalidArgument, "polynomial degree must be 1, 2 or 3");
      if (!(spec.C > 0.0) || !(spec.lambda >= 0.0))
        throw Error(ErrorCode::kInvalidArgument, "svm needs C > 0 and lambda >= 0");
      const LabeledMatrix m = MapMatrix(raw, spec.degree);
      const double lambda = spec.family == Family::kFairSvm ? spec.lambda : 0.0;
      const auto p = MinimizeSubgradient(m.dim + 1, spec.svm_iterations,
                                         [&](std::span<const double> params, std::vector<double>* g) {
                                           return objective::FairHinge(params, m, spec.C, lambda, g);
                                         });
      model.w.assign(p.begin(), p.end() - 1);
      model.b = p.back();
      break;
    }
    case Family::kFixedLinear:
      break;
  }
  return model;
}

ClassifierModel Train(const ModelSpec& spec, const Scm& scm, const std::vector<Instance>& data,
                      std::uint64_t seed) {
  const FeatureSelector selector = FeatureSelector::Resolve(spec.selector, scm);
  if (spec.family == Family::kFixedLinear) return TrainOnMatrix(spec, selector, LabeledMatrix{0, selector.dim(), {}, {}, {}}, seed);
  return TrainOnMatrix(spec, selector, BuildMatrix(selector, scm, data), seed);
}

// ---------------------------------------------------------------------------
// Prediction

double DecisionValueFromInputs(const ClassifierModel& model, std::span<const double> inputs) {
  if (model.spec.family == Family::kLogisticMlp) return MlpForward(model.layers, inputs, nullptr);
  const int deg = MapDegree(model.spec);
  if (deg == 1) return simd::Active().dot(model.w.data(), inputs.data(), inputs.size()) + model.b;
  double buf[256];
  std::vector<double> heap;
  double* phi = buf;
  if (model.w.size() > 256) {
    heap.resize(model.w.size());
    phi = heap.data();
  }
  PolynomialFeatures(inputs, deg, phi);
  return simd::Active().dot(model.w.data(), phi, model.w.size()) + model.b;
}

double DecisionValue(const ClassifierModel& model, std::span<const double> values,
                     std::span<const double> exogenous) {
  double buf[64];
  std::vector<double> heap;
  double* in = buf;
  if (model.input_dim() > 64) {
    heap.resize(model.input_dim());
    in = heap.data();
  }
  model.selector.Extract(values, exogenous, in);
  return DecisionValueFromInputs(model, std::span<const double>(in, model.input_dim()));
}

double DecisionValue(const ClassifierModel& model, const Instance& v) {
  if (model.selector.reads_exogenous() && !v.exogenous)
    throw Error(ErrorCode::kMissingVariable, "model reads exogenous inputs the instance lacks");
  return DecisionValue(model, v.values,
                       v.exogenous ? std::span<const double>(*v.exogenous) : std::span<const double>());
}

int Predict(const ClassifierModel& model, const Instance& v) {
  return PredictFromValue(DecisionValue(model, v));
}

std::optional<double> MarginDistance(const ClassifierModel& model, std::span<const double> inputs) {
  if (model.spec.family == Family::kLogisticMlp) return std::nullopt;
  const double norm = Norm(model.w);
  if (norm == 0.0) return std::nullopt;
  return std::abs(DecisionValueFromInputs(model, inputs)) / norm;
}

double Accuracy(const ClassifierModel& model, const LabeledMatrix& m) {
  if (m.rows == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double f = DecisionValueFromInputs(model, std::span<const double>(m.x.data() + r * m.dim, m.dim));
    correct += PredictFromValue(f) == static_cast<int>(m.y[r]);
  }
  return static_cast<double>(correct) / static_cast<double>(m.rows);
}

// ---------------------------------------------------------------------------

std::string_view CvScoreName(CvScore score) {
  switch (score) {
    case CvScore::kAccuracy: return "accuracy";
    case CvScore::kAccuracyMinusDistanceGap: return "accuracy-minus-gap";
    case CvScore::kDistanceGap: return "gap";
  }
  return "?";
}

CvScore ParseCvScore(std::string_view name) {
  for (CvScore s : {CvScore::kAccuracy, CvScore::kAccuracyMinusDistanceGap, CvScore::kDistanceGap})
    if (CvScoreName(s) == name) return s;
  throw Error(ErrorCode::kParseError, "unknown cross-validation score '" + std::string(name) + "'");
}

CrossValidationResult CrossValidate(const std::vector<ModelSpec>& specs, const Scm& scm,
                                    const std::vector<Instance>& data, int folds,
                                    std::uint64_t seed, CvScore score) {
  if (specs.empty()) throw Error(ErrorCode::kInvalidArgument, "no specs to cross-validate");
  if (folds < 2 || data.size() < static_cast<std::size_t>(folds))
    throw Error(ErrorCode::kInvalidArgument, "need folds >= 2 and at least one row per fold");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(seed, StreamId("cv-folds"));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
  std::vector<int> fold_of(data.size());
  for (std::size_t k = 0; k < order.size(); ++k) fold_of[order[k]] = static_cast<int>(k % folds);

  CrossValidationResult result;
  result.fold_accuracy.assign(specs.size(), std::vector<double>(folds, 0.0));
  result.mean_accuracy.assign(specs.size(), 0.0);
  result.mean_gap.assign(specs.size(), 0.0);
  result.mean_score.assign(specs.size(), 0.0);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const FeatureSelector selector = FeatureSelector::Resolve(specs[s].selector, scm);
    const LabeledMatrix all = BuildMatrix(selector, scm, data);
    for (int f = 0; f < folds; ++f) {
      LabeledMatrix train, val;
      train.dim = val.dim = all.dim;
      for (std::size_t r = 0; r < all.rows; ++r) {
        LabeledMatrix& part = fold_of[r] == f ? val : train;
        part.x.insert(part.x.end(), all.x.begin() + r * all.dim, all.x.begin() + (r + 1) * all.dim);
        part.y.push_back(all.y[r]);
        part.group.push_back(all.group[r]);
        ++part.rows;
      }
      const ClassifierModel model = TrainOnMatrix(specs[s], selector, train, seed + f);
      result.fold_accuracy[s][f] = Accuracy(model, val);
      if (score != CvScore::kAccuracy) result.mean_gap[s] += DistanceGapOn(model, val) / folds;
    }
    result.mean_accuracy[s] =
        std::accumulate(result.fold_accuracy[s].begin(), result.fold_accuracy[s].end(), 0.0) / folds;
    result.mean_score[s] = score == CvScore::kDistanceGap ? -result.mean_gap[s]
                                                          : result.mean_accuracy[s] - result.mean_gap[s];
    if (result.mean_score[s] > result.mean_score[result.best]) result.best = s;
  }
  return result;
}

double DistanceGapOn(const ClassifierModel& model, const LabeledMatrix& m) {
  if (model.w.empty() || !model.layers.empty()) return 0.0;
  std::vector<double> params = model.w;
  params.push_back(model.b);
  return objective::DistanceGap(params, MapMatrix(m, MapDegree(model.spec)));
}

CounterfactualFairness CheckCounterfactualFairness(const ClassifierModel& model, const Scm& scm,
                                                   const std::vector<Instance>& data) {
  CounterfactualFairness out;
  std::vector<double> twin(scm.num_endogenous());
  for (const auto& v : data) {
    const ExogenousVector u = Abduct(scm, v);
    const std::span<const double> exo = v.exogenous ? std::span<const double>(*v.exogenous)
                                                    : std::span<const double>(u);
    const int factual = PredictFromValue(DecisionValue(model, v.values, exo));
    bool violated = false;
    for (double a : scm.protected_domain()) {
      const std::pair<std::size_t, double> fix[] = {{scm.protected_index(), a}};
      PropagateCounterfactual(scm, v.values, u, fix, twin);
      violated |= PredictFromValue(DecisionValue(model, twin, exo)) != factual;
    }
    out.violations += violated;
  }
  out.fair = out.violations == 0;
  return out;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

template <typename T>
void AppendValues(std::string& s, const std::vector<T>& values) {
  s += ' ' + std::to_string(values.size());
  for (const auto& v : values) {
    if constexpr (std::is_floating_point_v<T>) s += ' ' + FormatDouble(v);
    else if constexpr (std::is_same_v<T, std::string>) s += ' ' + v;
    else s += ' ' + std::to_string(v);
  }
}

}  // namespace

std::string SerializeModel(const ClassifierModel& model) {
  const ModelSpec& spec = model.spec;
  std::string s = "model 1\n";
  s += "label " + (spec.label.empty() ? std::string("-") : spec.label) + '\n';
  s += "family " + std::string(FamilyName(spec.family)) + '\n';
  s += "selector " + std::string(SelectorModeName(model.selector.mode)) + '\n';
  s += "inputs";
  AppendValues(s, model.selector.names);
  s += "\nendogenous";
  AppendValues(s, model.selector.endogenous);
  s += "\nexogenous";
  AppendValues(s, model.selector.exogenous);
  s += "\ndegree " + std::to_string(spec.degree) + '\n';
  s += "C " + FormatDouble(spec.C) + '\n';
  s += "lambda " + FormatDouble(spec.lambda) + '\n';
  s += "hidden";
  AppendValues(s, spec.hidden);
  s += "\nbias " + FormatDouble(model.b) + '\n';
  s += "weights";
  AppendValues(s, model.w);
  s += '\n';
  for (const auto& l : model.layers) {
    s += "layer " + std::to_string(l.in) + ' ' + std::to_string(l.out);
    for (double v : l.weights) s += ' ' + FormatDouble(v);
    for (double v : l.bias) s += ' ' + FormatDouble(v);
    s += '\n';
  }
  return s;
}

ClassifierModel ParseModel(std::string_view text) {
  ClassifierModel model;
  bool header = false;
  std::size_t start = 0;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw Error(ErrorCode::kParseError, "model line " + std::to_string(line_no) + ": " + msg);
  };
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == text.npos) nl = text.size();
    const auto tokens = SplitWhitespace(text.substr(start, nl - start));
    start = nl + 1;
    ++line_no;
    if (tokens.empty()) continue;
    std::size_t pos = 1;
    auto next = [&]() -> const std::string& {
      if (pos >= tokens.size()) fail("unexpected end of line");
      return tokens[pos++];
    };
    auto count = [&]() { return static_cast<std::size_t>(std::stoull(next())); };
    const std::string& key = tokens[0];
    try {
      if (key == "model") {
        header = next() == "1";
      } else if (key == "label") {
        model.spec.label = next();
        if (model.spec.label == "-") model.spec.label.clear();
      } else if (key == "family") {
        model.spec.family = ParseFamily(next());
      } else if (key == "selector") {
        model.selector.mode = ParseSelectorMode(next());
        model.spec.selector = model.selector.mode;
      } else if (key == "inputs") {
        model.selector.names.resize(count());
        for (auto& n : model.selector.names) n = next();
      } else if (key == "endogenous" || key == "exogenous") {
        auto& dst = key == "endogenous" ? model.selector.endogenous : model.selector.exogenous;
        dst.resize(count());
        for (auto& i : dst) i = static_cast<std::size_t>(std::stoull(next()));
      } else if (key == "degree") {
        model.spec.degree = std::stoi(next());
      } else if (key == "C") {
        model.spec.C = ParseDouble(next());
      } else if (key == "lambda") {
        model.spec.lambda = ParseDouble(next());
      } else if (key == "hidden") {
        model.spec.hidden.resize(count());
        for (auto& h : model.spec.hidden) h = std::stoi(next());
      } else if (key == "bias") {
        model.b = ParseDouble(next());
      } else if (key == "weights") {
        model.w.resize(count());
        for (auto& v : model.w) v = ParseDouble(next());
      } else if (key == "layer") {
        DenseLayer l;
        l.in = count();
        l.out = count();
        l.weights.resize(l.in * l.out);
        for (auto& v : l.weights) v = ParseDouble(next());
        l.bias.resize(l.out);
        for (auto& v : l.bias) v = ParseDouble(next());
        model.layers.push_back(std::move(l));
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      fail("malformed number");
    } catch (const std::out_of_range&) {
      fail("number out of range");
    }
    if (pos != tokens.size()) fail("trailing tokens");
  }
  if (!header) throw Error(ErrorCode::kParseError, "missing 'model 1' header");
  if (model.selector.names.size() != model.selector.dim())
    throw Error(ErrorCode::kParseError, "input names do not match input indices");
  if (model.spec.family == Family::kFixedLinear) {
    model.spec.fixed_weights = model.w;
    model.spec.fixed_bias = model.b;
  }
  return model;
}

void SaveModel(const ClassifierModel& model, const std::filesystem::path& path) {
  WriteFile(path, SerializeModel(model));
}

ClassifierModel LoadModel(const std::filesystem::path& path) { return ParseModel(ReadFile(path)); }

}  // namespace fairrec
