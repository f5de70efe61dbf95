#include "fairrec/rng.hpp"

#include <cmath>
#include <numbers>

namespace fairrec {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void MulHiLo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

double ToUnit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::Generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kMul0, ctr[0], hi0, lo0);
    MulHiLo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RandomBlock RandomBlock::At(std::uint64_t seed, std::uint64_t row, std::uint32_t stream,
                            std::uint32_t lane) {
  const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(row),
                                   static_cast<std::uint32_t>(row >> 32), stream, lane};
  return RandomBlock{Philox4x32::Generate(ctr, Philox4x32::KeyFromSeed(seed))};
}

double RandomBlock::Uniform(int half) const {
  return half == 0 ? ToUnit(words[0], words[1]) : ToUnit(words[2], words[3]);
}

double RandomBlock::Gaussian() const {
  const double radius = std::sqrt(-2.0 * std::log(UniformOpenLow(0)));
  return radius * std::cos(2.0 * std::numbers::pi * Uniform(1));
}

std::uint64_t CounterRng::Below(std::uint64_t bound) {
  // Multiply-shift on 53 random bits; bias is < 2^-40 for the sizes used here.
  return static_cast<std::uint64_t>(Uniform() * static_cast<double>(bound));
}

}  // namespace fairrec
