#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gamelab {

// 64-bit FNV-1a; stable across platforms and releases.
std::uint64_t stable_hash(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fully specified by the standard but the std distributions are not, so the
// uniform and normal transforms are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gamelab
