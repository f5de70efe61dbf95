#include <cmath>

#include "fairrec/simd/kernels.hpp"

namespace fairrec::simd {
namespace {

double DotScalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void AffineRowsScalar(const double* rows, std::size_t n_rows, std::size_t dim, const double* w,
                      double bias, double* out) {
  for (std::size_t i = 0; i < n_rows; ++i) out[i] = DotScalar(rows + i * dim, w, dim) + bias;
}

void AccumulateRowsScalar(const double* coef, const double* rows, std::size_t n_rows,
                          std::size_t dim, double* out) {
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double c = coef[i];
    if (c == 0.0) continue;
    const double* row = rows + i * dim;
    for (std::size_t k = 0; k < dim; ++k) out[k] += c * row[k];
  }
}

void SquaredDistancesScalar(const double* x, const double* centers, std::size_t n,
                            std::size_t dim, double* out) {
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double* column = centers + k * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = x[k] - column[j];
      out[j] += d * d;
    }
  }
}

double RbfWeightedSumScalar(const double* x, const double* centers, const double* weights,
                            std::size_t n, std::size_t dim, double gamma) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = x[k] - centers[k * n + j];
      d2 += d * d;
    }
    acc += weights[j] * std::exp(-gamma * d2);
  }
  return acc;
}

}  // namespace

const KernelSet& ScalarKernels() {
  static const KernelSet kSet{"scalar",          DotScalar,
                              AffineRowsScalar,  AccumulateRowsScalar,
                              SquaredDistancesScalar, RbfWeightedSumScalar};
  return kSet;
}

}  // namespace fairrec::simd
