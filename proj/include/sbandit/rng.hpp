#pragma once

#include <cstdint>
#include <initializer_list>

namespace sbandit {

// splitmix64: the base generator and the mixer for stream keys.
// Fully specified arithmetic, so streams are identical on every platform.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Collapses an ordered key (seed, epoch, role tag, arm, draw index, ...)
// into one 64-bit stream seed.
inline std::uint64_t mix_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x8f3a91c27d5e46b1ULL;
  for (std::uint64_t p : parts) {
    std::uint64_t s = h ^ (p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    h = splitmix64_next(s);
  }
  return h;
}

// Role tags for derived streams.
inline constexpr std::uint64_t kRewardStream = 0x52;    // per (epoch, arm, pull)
inline constexpr std::uint64_t kStrategyStream = 0x53;  // per (epoch, arm)
inline constexpr std::uint64_t kTapeStream = 0x54;      // sampled verifier tapes

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform on [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(next_unit() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace sbandit
