// Built only on aarch64, where Advanced SIMD is part of the base ISA.
#include <arm_neon.h>

#include <cmath>

#include "fairrec/simd/kernels.hpp"

namespace fairrec::simd::detail {
namespace {

double DotNeon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + k), vld1q_f64(b + k));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + k + 2), vld1q_f64(b + k + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void AffineRowsNeon(const double* rows, std::size_t n_rows, std::size_t dim, const double* w,
                    double bias, double* out) {
  for (std::size_t i = 0; i < n_rows; ++i) out[i] = DotNeon(rows + i * dim, w, dim) + bias;
}

void AccumulateRowsNeon(const double* coef, const double* rows, std::size_t n_rows,
                        std::size_t dim, double* out) {
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double c = coef[i];
    if (c == 0.0) continue;
    const double* row = rows + i * dim;
    const float64x2_t vc = vdupq_n_f64(c);
    std::size_t k = 0;
    for (; k + 2 <= dim; k += 2) {
      vst1q_f64(out + k, vfmaq_f64(vld1q_f64(out + k), vc, vld1q_f64(row + k)));
    }
    for (; k < dim; ++k) out[k] += c * row[k];
  }
}

void SquaredDistancesNeon(const double* x, const double* centers, std::size_t n,
                          std::size_t dim, double* out) {
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      const float64x2_t d = vsubq_f64(vdupq_n_f64(x[k]), vld1q_f64(centers + k * n + j));
      acc = vfmaq_f64(acc, d, d);
    }
    vst1q_f64(out + j, acc);
  }
  for (; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = x[k] - centers[k * n + j];
      acc += d * d;
    }
    out[j] = acc;
  }
}

double RbfWeightedSumNeon(const double* x, const double* centers, const double* weights,
                          std::size_t n, std::size_t dim, double gamma) {
  float64x2_t sum = vdupq_n_f64(0.0);
  double d2[2];
  double e[2];
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      const float64x2_t d = vsubq_f64(vdupq_n_f64(x[k]), vld1q_f64(centers + k * n + j));
      acc = vfmaq_f64(acc, d, d);
    }
    vst1q_f64(d2, acc);
    e[0] = std::exp(-gamma * d2[0]);
    e[1] = std::exp(-gamma * d2[1]);
    sum = vfmaq_f64(sum, vld1q_f64(weights + j), vld1q_f64(e));
  }
  double total = vaddvq_f64(sum);
  for (; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = x[k] - centers[k * n + j];
      acc += d * d;
    }
    total += weights[j] * std::exp(-gamma * acc);
  }
  return total;
}

}  // namespace

const KernelSet& NeonKernelTable() {
  static const KernelSet kSet{"neon",          DotNeon,
                              AffineRowsNeon,  AccumulateRowsNeon,
                              SquaredDistancesNeon, RbfWeightedSumNeon};
  return kSet;
}

}  // namespace fairrec::simd::detail
