#pragma once

#include <cstdint>
#include <random>

namespace qclock {

// SplitMix64 finalizer; used only to derive stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// One independent random stream per (master seed, task index). Every task owns
// its stream, so results do not depend on scheduling or thread count.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t index)
      : seed_(stream_seed(master_seed, index)), engine_(seed_) {}

  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits; bit-identical on every platform.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qclock
