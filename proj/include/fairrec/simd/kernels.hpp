#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops used by training (batched scores, gradient
// accumulation), kernel ridge regression (RBF sums) and batched prediction.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2+FMA
// on x86-64, NEON on aarch64) are selected once per process at first use;
// FAIRREC_SIMD=scalar|avx2|neon overrides the choice. Variants differ from the
// reference only in floating-point summation order.
namespace fairrec::simd {

struct KernelSet {
  std::string_view name;

  // sum_k a[k] * b[k]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // out[i] = rows[i, :] . w + bias   (rows row-major, n_rows x dim)
  void (*affine_rows)(const double* rows, std::size_t n_rows, std::size_t dim,
                      const double* w, double bias, double* out);

  // out[k] += sum_i coef[i] * rows[i, k]
  void (*accumulate_rows)(const double* coef, const double* rows, std::size_t n_rows,
                          std::size_t dim, double* out);

  // out[j] = || x - c_j ||^2 with centers stored column-major: centers[k * n + j]
  void (*squared_distances)(const double* x, const double* centers, std::size_t n,
                            std::size_t dim, double* out);

  // sum_j weights[j] * exp(-gamma * || x - c_j ||^2), centers column-major.
  double (*rbf_weighted_sum)(const double* x, const double* centers, const double* weights,
                             std::size_t n, std::size_t dim, double gamma);
};

const KernelSet& ScalarKernels();

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelSet* Avx2Kernels();
const KernelSet* NeonKernels();

// The process-wide selection.
const KernelSet& Active();

// All variants usable on this machine, scalar first. For equivalence tests.
std::vector<const KernelSet*> Available();

// Convenience wrappers over Active().
inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Active().dot(a.data(), b.data(), a.size());
}

}  // namespace fairrec::simd
