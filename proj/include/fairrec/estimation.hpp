#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fairrec/scm.hpp"

namespace fairrec {

enum class Regressor { kLinearRidge, kKernelRidge };

std::string_view RegressorName(Regressor r);
Regressor ParseRegressor(std::string_view name);  // "linear-ridge", "kernel-ridge"

struct AnmFitConfig {
  Regressor regressor = Regressor::kKernelRidge;
  double ridge = 1e-3;
  // RBF bandwidth sigma, k(x, y) = exp(-||x - y||^2 / (2 sigma^2)). Unset means
  // the median pairwise distance between parent vectors.
  std::optional<double> bandwidth;
  // Cross-validation candidates. Empty lists keep the single value above;
  // bandwidth candidates multiply the resolved bandwidth.
  std::vector<double> cv_ridge;
  std::vector<double> cv_bandwidth_scale;
  int cv_folds = 5;
  std::uint64_t seed = 0;
  int workers = 1;

  // Throws kInvalidArgument.
  void Validate() const;
};

// Fits X_i := f_i(PA_i) + U_i for every endogenous variable with parents in
// `graph`; roots resample their observed values. Noise of non-roots is stored
// as a Gaussian matched to the residual mean and variance. Variable and noise
// names follow `graph`. Throws kDegenerateData (fewer than 50 rows),
// kSingularFit (rank-deficient linear design without ridge), kCycleDetected.
Scm FitAnm(const std::vector<Instance>& data, const CausalGraph& graph, const AnmFitConfig& config);

// u_i = x_i - f_i(pa_i) for every equation of a fitted SCM.
ExogenousVector ResidualAbduct(const Scm& fitted, const Instance& v);

// Median of pairwise Euclidean distances between rows (row-major, `dim`
// columns). Uses at most the first 1000 rows.
double MedianPairwiseDistance(const std::vector<double>& rows, std::size_t dim);

}  // namespace fairrec
