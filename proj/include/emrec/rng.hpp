#pragma once

#include <cmath>
#include <cstdint>

namespace emrec {

// Deterministic 64-bit generator (splitmix64). Every random draw in the
// project goes through this class: std::random distributions are
// implementation-defined, which would break the byte-identical-output
// contracts across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_range(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // Uniform integer in [0, n). Multiply-shift reduction; bias is below
  // 2^-64 per draw.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller, spare value cached.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = next_unit();
    } while (u1 <= 0.0);
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846264338327950288;
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stable sub-stream seeding (per tree, per patient, per subset draw). The
// mapping is part of the serialized-model contract: tree t of a model with
// seed s is always trained from Rng(stable_hash(s, t)).
inline std::uint64_t stable_hash(std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  return rng.next_u64();
}

}  // namespace emrec
