#pragma once

#include <cstdint>
#include <random>

namespace crowdtrack {

/// Seeded random source owned by one run (or one thread). Keeping the normal
/// distribution persistent preserves its internal pair cache, so draw order
/// is reproducible for a given seed and call sequence.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double normal(double mean, double std) { return mean + std * normal(); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<int>(mean)(engine_);
  }
  std::uint64_t raw() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Per-run seeds derived from a master seed; splitmix-style mix so that
/// adjacent run ids do not produce correlated mt19937 streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run_id) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (run_id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace crowdtrack
