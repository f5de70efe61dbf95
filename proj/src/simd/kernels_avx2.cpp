// Compiled with -mavx2 -mfma. Nothing in this file may run before dispatch.cpp
// has confirmed the CPU supports both extensions.
#include <immintrin.h>

#include <cmath>

#include "fairrec/simd/kernels.hpp"

namespace fairrec::simd::detail {
namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double DotAvx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
  }
  double acc = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void AffineRowsAvx2(const double* rows, std::size_t n_rows, std::size_t dim, const double* w,
                    double bias, double* out) {
  for (std::size_t i = 0; i < n_rows; ++i) out[i] = DotAvx2(rows + i * dim, w, dim) + bias;
}

void AccumulateRowsAvx2(const double* coef, const double* rows, std::size_t n_rows,
                        std::size_t dim, double* out) {
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double c = coef[i];
    if (c == 0.0) continue;
    const double* row = rows + i * dim;
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t k = 0;
    for (; k + 4 <= dim; k += 4) {
      _mm256_storeu_pd(out + k,
                       _mm256_fmadd_pd(vc, _mm256_loadu_pd(row + k), _mm256_loadu_pd(out + k)));
    }
    for (; k < dim; ++k) out[k] += c * row[k];
  }
}

void SquaredDistancesAvx2(const double* x, const double* centers, std::size_t n,
                          std::size_t dim, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) {
      const __m256d d = _mm256_sub_pd(_mm256_set1_pd(x[k]), _mm256_loadu_pd(centers + k * n + j));
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    _mm256_storeu_pd(out + j, acc);
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

double RbfWeightedSumAvx2(const double* x, const double* centers, const double* weights,
                          std::size_t n, std::size_t dim, double gamma) {
  __m256d sum = _mm256_setzero_pd();
  alignas(32) double d2[4];
  alignas(32) double e[4];
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) {
      const __m256d d = _mm256_sub_pd(_mm256_set1_pd(x[k]), _mm256_loadu_pd(centers + k * n + j));
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    _mm256_store_pd(d2, acc);
    for (int t = 0; t < 4; ++t) e[t] = std::exp(-gamma * d2[t]);
    sum = _mm256_fmadd_pd(_mm256_loadu_pd(weights + j), _mm256_load_pd(e), sum);
  }
  double total = HorizontalSum(sum);
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

const KernelSet& Avx2KernelTable() {
  static const KernelSet kSet{"avx2",          DotAvx2,
                              AffineRowsAvx2,  AccumulateRowsAvx2,
                              SquaredDistancesAvx2, RbfWeightedSumAvx2};
  return kSet;
}

}  // namespace fairrec::simd::detail
