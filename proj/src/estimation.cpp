#include "fairrec/estimation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fairrec/error.hpp"
#include "fairrec/parallel.hpp"
#include "fairrec/rng.hpp"

namespace fairrec {

std::string_view RegressorName(Regressor r) {
  return r == Regressor::kLinearRidge ? "linear-ridge" : "kernel-ridge";
}

Regressor ParseRegressor(std::string_view name) {
  if (name == "linear-ridge") return Regressor::kLinearRidge;
  if (name == "kernel-ridge") return Regressor::kKernelRidge;
  throw Error(ErrorCode::kParseError, "unknown regressor '" + std::string(name) + "'");
}

void AnmFitConfig::Validate() const {
  auto bad = [](const std::string& m) { return Error(ErrorCode::kInvalidArgument, m); };
  if (!(ridge >= 0.0)) throw bad("ridge must be >= 0");
  if (bandwidth && !(*bandwidth > 0.0)) throw bad("bandwidth must be > 0");
  for (double r : cv_ridge)
    if (!(r >= 0.0)) throw bad("cv ridge candidates must be >= 0");
  for (double s : cv_bandwidth_scale)
    if (!(s > 0.0)) throw bad("cv bandwidth scales must be > 0");
  if ((!cv_ridge.empty() || !cv_bandwidth_scale.empty()) && cv_folds < 2)
    throw bad("cross-validation needs at least 2 folds");
}

double MedianPairwiseDistance(const std::vector<double>& rows, std::size_t dim) {
  const std::size_t n = std::min<std::size_t>(rows.size() / dim, 1000);
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = rows[i * dim + k] - rows[j * dim + k];
        acc += diff * diff;
      }
      d.push_back(std::sqrt(acc));
    }
  }
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Regression {
  Matrix x;  // n x k parent values
  Vector y;
};

struct LinearFit {
  double intercept = 0.0;
  Vector beta;
};

LinearFit FitLinear(const Matrix& x, const Vector& y, double ridge) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix xc = x.rowwise() - mean;
  const double ybar = y.mean();
  const Vector yc = y.array() - ybar;
  LinearFit fit;
  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(xc);
    if (qr.rank() < xc.cols())
      throw Error(ErrorCode::kSingularFit, "rank-deficient design for an unregularised linear fit");
    fit.beta = qr.solve(yc);
  } else {
    Matrix gram = xc.transpose() * xc;
    gram.diagonal().array() += ridge;
    fit.beta = gram.ldlt().solve(xc.transpose() * yc);
  }
  fit.intercept = ybar - mean.dot(fit.beta);
  return fit;
}

Matrix RbfGram(const Matrix& a, const Matrix& b, double gamma) {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
  return k;
}

struct KernelFit {
  double intercept = 0.0;
  Vector dual;
};

KernelFit FitKernel(const Matrix& gram, const Vector& y, double ridge) {
  KernelFit fit;
  fit.intercept = y.mean();
  Matrix a = gram;
  a.diagonal().array() += ridge;
  fit.dual = a.ldlt().solve((y.array() - fit.intercept).matrix());
  return fit;
}

Matrix Rows(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(idx[r]);
  return out;
}

Vector Entries(const Vector& v, const std::vector<Eigen::Index>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(idx[r]);
  return out;
}

std::vector<int> FoldAssignment(std::size_t n, int folds, std::uint64_t seed, std::uint32_t stream) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  CounterRng rng(seed, stream);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.Below(i)]);
  std::vector<int> fold(n);
  for (std::size_t r = 0; r < n; ++r) fold[perm[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
  return fold;
}

struct Choice {
  double ridge;
  double scale;
};

// Candidate with the lowest k-fold RMSE; ties go to the earliest.
Choice CrossValidate(const Regression& reg, const AnmFitConfig& cfg, double sigma, std::uint32_t stream) {
  const std::vector<double> ridges = cfg.cv_ridge.empty() ? std::vector<double>{cfg.ridge} : cfg.cv_ridge;
  const std::vector<double> scales =
      cfg.cv_bandwidth_scale.empty() || cfg.regressor == Regressor::kLinearRidge
          ? std::vector<double>{1.0}
          : cfg.cv_bandwidth_scale;
  if (ridges.size() * scales.size() == 1) return {ridges[0], scales[0]};

  const std::size_t n = static_cast<std::size_t>(reg.y.size());
  const std::vector<int> fold = FoldAssignment(n, cfg.cv_folds, cfg.seed, stream);
  std::vector<double> sse(ridges.size() * scales.size(), 0.0);
  for (int f = 0; f < cfg.cv_folds; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
    if (te.empty() || tr.empty()) continue;
    const Matrix xtr = Rows(reg.x, tr), xte = Rows(reg.x, te);
    const Vector ytr = Entries(reg.y, tr), yte = Entries(reg.y, te);
    if (cfg.regressor == Regressor::kLinearRidge) {
      for (std::size_t r = 0; r < ridges.size(); ++r) {
        const LinearFit fit = FitLinear(xtr, ytr, ridges[r]);
        const Vector pred = (xte * fit.beta).array() + fit.intercept;
        sse[r] += (pred - yte).squaredNorm();
      }
      continue;
    }
    const double ybar = ytr.mean();
    const Vector yc = ytr.array() - ybar;
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const double bw = sigma * scales[s];
      const double gamma = 1.0 / (2.0 * bw * bw);
      // One eigendecomposition per bandwidth serves every ridge value.
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(RbfGram(xtr, xtr, gamma));
      const Matrix cross = RbfGram(xte, xtr, gamma);
      const Vector proj = eig.eigenvectors().transpose() * yc;
      for (std::size_t r = 0; r < ridges.size(); ++r) {
        const Vector coef = proj.array() / (eig.eigenvalues().array().max(0.0) + ridges[r]);
        const Vector dual = eig.eigenvectors() * coef;
        const Vector pred = (cross * dual).array() + ybar;
        sse[s * ridges.size() + r] += (pred - yte).squaredNorm();
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < sse.size(); ++c)
    if (sse[c] < sse[best]) best = c;
  if (cfg.regressor == Regressor::kLinearRidge) return {ridges[best], 1.0};
  return {ridges[best % ridges.size()], scales[best / ridges.size()]};
}

Mechanism FitEquation(const Regression& reg, const AnmFitConfig& cfg, std::uint32_t stream) {
  const std::size_t k = static_cast<std::size_t>(reg.x.cols());
  if (cfg.regressor == Regressor::kLinearRidge) {
    const Choice c = CrossValidate(reg, cfg, 1.0, stream);
    const LinearFit fit = FitLinear(reg.x, reg.y, c.ridge);
    AdditivePolynomial m;
    m.intercept = fit.intercept;
    for (std::size_t j = 0; j < k; ++j) m.terms.push_back({j, fit.beta(static_cast<Eigen::Index>(j)), 1});
    return m;
  }
  const std::vector<double> flat(reg.x.data(), reg.x.data() + reg.x.size());
  const double sigma = cfg.bandwidth.value_or(MedianPairwiseDistance(flat, k));
  const Choice c = CrossValidate(reg, cfg, sigma, stream);
  const double bw = sigma * c.scale;
  AdditiveKernelRidge m;
  m.gamma = 1.0 / (2.0 * bw * bw);
  const KernelFit fit = FitKernel(RbfGram(reg.x, reg.x, m.gamma), reg.y, c.ridge);
  m.intercept = fit.intercept;
  const std::size_t n = static_cast<std::size_t>(reg.y.size());
  m.dual.assign(fit.dual.data(), fit.dual.data() + n);
  m.centers.resize(n * k);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t d = 0; d < k; ++d) m.centers[d * n + j] = reg.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(d));
  return m;
}

}  // namespace

Scm FitAnm(const std::vector<Instance>& data, const CausalGraph& graph, const AnmFitConfig& config) {
  config.Validate();
  if (data.size() < 50) throw Error(ErrorCode::kDegenerateData, "fitting needs at least 50 rows");
  TopologicalOrder(graph);
  const std::size_t nv = graph.variables.size();
  const std::size_t n = data.size();
  for (const auto& v : data)
    if (v.values.size() != nv) throw Error(ErrorCode::kMissingVariable, "row width does not match the graph");

  std::vector<std::string> noise(nv);
  for (std::size_t i = 0; i < nv; ++i)
    noise[i] = i < graph.noise_names.size() && !graph.noise_names[i].empty() ? graph.noise_names[i]
                                                                             : "u_" + graph.variables[i].name;

  std::vector<Mechanism> mech(nv);
  std::vector<NoiseSpec> spec(nv);
  ParallelFor(nv, config.workers, [&](std::size_t i) {
    const auto& pa = graph.parents[i];
    if (pa.empty()) {
      EmpiricalNoise e;
      for (const auto& v : data) e.values.push_back(v.values[i]);
      mech[i] = AffineInNoise{};
      spec[i] = std::move(e);
      return;
    }
    Regression reg{Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pa.size())),
                   Vector(static_cast<Eigen::Index>(n))};
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < pa.size(); ++j)
        reg.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = data[r].values[pa[j]];
      reg.y(static_cast<Eigen::Index>(r)) = data[r].values[i];
    }
    mech[i] = FitEquation(reg, config, StreamId(graph.variables[i].name));
    double sum = 0.0, sq = 0.0;
    std::vector<double> parents(pa.size());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < pa.size(); ++j) parents[j] = data[r].values[pa[j]];
      const double res = data[r].values[i] - EvaluateMechanism(mech[i], parents, 0.0);
      sum += res;
      sq += res * res;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(sq / static_cast<double>(n) - mean * mean, 1e-12);
    spec[i] = GaussianNoise{mean, var};
  });

  std::vector<ExogenousSpec> exo;
  std::vector<StructuralEquation> eqs;
  std::vector<double> domain;
  for (std::size_t i = 0; i < nv; ++i) {
    exo.push_back({noise[i], spec[i]});
    StructuralEquation eq{graph.variables[i].name, {}, noise[i], mech[i]};
    for (std::size_t p : graph.parents[i]) eq.parents.push_back(graph.variables[p].name);
    eqs.push_back(std::move(eq));
    if (graph.variables[i].kind == VariableKind::kProtected) {
      for (const auto& v : data) domain.push_back(v.values[i]);
      std::sort(domain.begin(), domain.end());
      domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
    }
  }
  return Scm(graph.variables, std::move(exo), std::move(eqs), std::move(domain), /*estimated=*/true);
}

ExogenousVector ResidualAbduct(const Scm& fitted, const Instance& v) {
  if (v.values.size() != fitted.num_endogenous())
    throw Error(ErrorCode::kMissingVariable, "instance width does not match the SCM");
  ExogenousVector u(fitted.num_exogenous(), 0.0);
  std::vector<double> parents;
  for (std::size_t i = 0; i < fitted.num_endogenous(); ++i) {
    const auto& eq = fitted.equation(i);
    if (!eq.noise) continue;
    parents.clear();
    for (std::size_t p : eq.parents) parents.push_back(v.values[p]);
    u[*eq.noise] = v.values[i] - EvaluateMechanism(eq.mechanism, parents, 0.0);
  }
  return u;
}

}  // namespace fairrec
