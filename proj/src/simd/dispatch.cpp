#include <cstdlib>
#include <string_view>

#include "fairrec/simd/kernels.hpp"

namespace fairrec::simd {

namespace detail {
#if defined(FAIRREC_HAVE_AVX2)
const KernelSet& Avx2KernelTable();
#endif
#if defined(FAIRREC_HAVE_NEON)
const KernelSet& NeonKernelTable();
#endif
}  // namespace detail

const KernelSet* Avx2Kernels() {
#if defined(FAIRREC_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (supported) return &detail::Avx2KernelTable();
#endif
  return nullptr;
}

const KernelSet* NeonKernels() {
#if defined(FAIRREC_HAVE_NEON)
  return &detail::NeonKernelTable();
#else
  return nullptr;
#endif
}

std::vector<const KernelSet*> Available() {
  std::vector<const KernelSet*> sets{&ScalarKernels()};
  if (const KernelSet* k = Avx2Kernels()) sets.push_back(k);
  if (const KernelSet* k = NeonKernels()) sets.push_back(k);
  return sets;
}

namespace {

const KernelSet& Select() {
  const char* env = std::getenv("FAIRREC_SIMD");
  const std::string_view wanted = env ? env : "";
  if (wanted == "scalar") return ScalarKernels();
  if (wanted == "avx2" && Avx2Kernels()) return *Avx2Kernels();
  if (wanted == "neon" && NeonKernels()) return *NeonKernels();
  if (const KernelSet* k = Avx2Kernels()) return *k;
  if (const KernelSet* k = NeonKernels()) return *k;
  return ScalarKernels();
}

}  // namespace

const KernelSet& Active() {
  static const KernelSet& selected = Select();
  return selected;
}

}  // namespace fairrec::simd
