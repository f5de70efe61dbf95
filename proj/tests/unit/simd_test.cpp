#include "fairrec/simd/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fairrec/rng.hpp"

namespace fairrec::simd {
namespace {

std::vector<double> RandomVector(std::size_t n, std::uint32_t stream) {
  CounterRng rng(99, stream);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.Gaussian();
  return v;
}

// Sizes straddle every unroll width and remainder path.
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 257};

class KernelEquivalence : public ::testing::TestWithParam<const KernelSet*> {};

TEST_P(KernelEquivalence, Dot) {
  const KernelSet& k = *GetParam();
  for (std::size_t n : kSizes) {
    const auto a = RandomVector(n, 1);
    const auto b = RandomVector(n, 2);
    const double ref = ScalarKernels().dot(a.data(), b.data(), n);
    EXPECT_NEAR(k.dot(a.data(), b.data(), n), ref, 1e-12 * (1.0 + std::abs(ref) + n)) << n;
  }
}

TEST_P(KernelEquivalence, AffineRows) {
  const KernelSet& k = *GetParam();
  for (std::size_t dim : kSizes) {
    const std::size_t rows = 13;
    const auto x = RandomVector(rows * dim, 3);
    const auto w = RandomVector(dim, 4);
    std::vector<double> ref(rows), got(rows);
    ScalarKernels().affine_rows(x.data(), rows, dim, w.data(), 0.25, ref.data());
    k.affine_rows(x.data(), rows, dim, w.data(), 0.25, got.data());
    for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(got[i], ref[i], 1e-11) << dim;
  }
}

TEST_P(KernelEquivalence, AccumulateRows) {
  const KernelSet& k = *GetParam();
  for (std::size_t dim : kSizes) {
    const std::size_t rows = 11;
    const auto x = RandomVector(rows * dim, 5);
    auto coef = RandomVector(rows, 6);
    coef[3] = 0.0;
    std::vector<double> ref(dim, 1.0), got(dim, 1.0);
    ScalarKernels().accumulate_rows(coef.data(), x.data(), rows, dim, ref.data());
    k.accumulate_rows(coef.data(), x.data(), rows, dim, got.data());
    for (std::size_t j = 0; j < dim; ++j) EXPECT_NEAR(got[j], ref[j], 1e-11) << dim;
  }
}

TEST_P(KernelEquivalence, SquaredDistancesAndRbf) {
  const KernelSet& k = *GetParam();
  for (std::size_t n : kSizes) {
    for (std::size_t dim : {1u, 3u, 4u, 6u}) {
      const auto centers = RandomVector(n * dim, 7);
      const auto x = RandomVector(dim, 8);
      const auto w = RandomVector(n, 9);
      std::vector<double> ref(n), got(n);
      ScalarKernels().squared_distances(x.data(), centers.data(), n, dim, ref.data());
      k.squared_distances(x.data(), centers.data(), n, dim, got.data());
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(got[j], ref[j], 1e-12);
      const double r = ScalarKernels().rbf_weighted_sum(x.data(), centers.data(), w.data(), n, dim, 0.7);
      EXPECT_NEAR(k.rbf_weighted_sum(x.data(), centers.data(), w.data(), n, dim, 0.7), r, 1e-12 * (1 + n));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllVariants, KernelEquivalence, ::testing::ValuesIn(Available()),
                         [](const auto& info) { return std::string(info.param->name); });

TEST(ScalarKernels, HandComputedValues) {
  const double a[] = {1, 2, 3};
  const double b[] = {4, -5, 6};
  EXPECT_DOUBLE_EQ(ScalarKernels().dot(a, b, 3), 12.0);
  // Two 2-d centers (0,0) and (1,1), column-major.
  const double centers[] = {0, 1, 0, 1};
  const double x[] = {1, 0};
  double d2[2];
  ScalarKernels().squared_distances(x, centers, 2, 2, d2);
  EXPECT_DOUBLE_EQ(d2[0], 1.0);
  EXPECT_DOUBLE_EQ(d2[1], 1.0);
  const double w[] = {2, -1};
  EXPECT_DOUBLE_EQ(ScalarKernels().rbf_weighted_sum(x, centers, w, 2, 2, 0.5), std::exp(-0.5));
}

TEST(Dispatch, ActiveIsOneOfAvailable) {
  bool found = false;
  for (const KernelSet* k : Available()) found |= (k == &Active());
  EXPECT_TRUE(found);
}

}  // namespace
}  // namespace fairrec::simd
