#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace recsim {

// SplitMix64 finalizer; used to derive independent seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// FNV-1a, stable across platforms (std::hash is not).
constexpr std::uint64_t stable_hash(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Uniform double in [0, 1) from a 64-bit value. Platform independent, unlike
/// std::uniform_real_distribution.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return to_unit(engine_()); }

  // Uniform integer in [0, n). Lemire-free modulo is fine for the small n used here.
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace recsim
