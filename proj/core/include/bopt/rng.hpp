#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bopt {

// Seedable random source with a pinned, implementation-independent output
// sequence: mt19937_64 for the raw bits, explicit conversions on top.
// std::normal_distribution and friends are deliberately avoided because the
// standard does not fix their algorithms; everything here is reproducible
// bit-for-bit across toolchains for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch only, no cached state).
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // sign(x)|x|^p of a standard normal x, rescaled to unit standard
  // deviation. Mildly leptokurtic for p > 1; p = 1 is exactly normal.
  double super_gaussian(double exponent) {
    const double x = normal();
    const double s = x < 0.0 ? -1.0 : 1.0;
    return s * std::pow(std::fabs(x), exponent) / super_gaussian_scale(exponent);
  }

  // sd of sign(x)|x|^p: the mean is 0 by symmetry, so sd^2 = E|x|^{2p}
  // = 2^p Gamma(p + 1/2) / sqrt(pi).
  static double super_gaussian_scale(double exponent) {
    return std::sqrt(std::pow(2.0, exponent) * std::tgamma(exponent + 0.5) /
                     std::sqrt(M_PI));
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 step; used to derive independent per-cell seeds so that sweep
// results do not depend on worker scheduling.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(base ^ mix_seed(stream));
}

}  // namespace bopt
