#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace fairrec {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// A counter-based generator: every draw is a pure function of (key, counter),
// so draws for individual i and variable j can be produced in any order, on
// any thread, and still be bitwise identical.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter Generate(Counter counter, Key key);

  static Key KeyFromSeed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }
};

// FNV-1a; used to key random streams by variable name so that two SCMs sharing
// an exogenous variable name draw identical values for it (common random numbers).
constexpr std::uint32_t StreamId(std::string_view name) {
  std::uint32_t h = 2166136261u;
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 16777619u;
  }
  return h;
}

constexpr std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// One 128-bit block of randomness addressed by (seed, row, stream, lane).
struct RandomBlock {
  Philox4x32::Counter words;

  static RandomBlock At(std::uint64_t seed, std::uint64_t row, std::uint32_t stream,
                        std::uint32_t lane = 0);

  // Uniform on [0, 1) with 53 bits, from words 0-1 (first) or 2-3 (second).
  double Uniform(int half = 0) const;
  // Uniform on (0, 1].
  double UniformOpenLow(int half = 0) const { return 1.0 - Uniform(half); }
  // Standard normal via Box-Muller using both halves.
  double Gaussian() const;
};

// Sequential convenience wrapper around the counter-based core, for code that
// wants a stream of draws (weight init, shuffles). Still a pure function of
// (seed, stream) and the number of draws taken.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t stream) : seed_(seed), stream_(stream) {}

  double Uniform() { return RandomBlock::At(seed_, next_++, stream_).Uniform(); }
  double Gaussian() { return RandomBlock::At(seed_, next_++, stream_).Gaussian(); }
  // Uniform integer in [0, bound).
  std::uint64_t Below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  std::uint64_t next_ = 0;
};

}  // namespace fairrec
