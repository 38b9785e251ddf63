#ifndef OPTOMECH_RNG_HPP
#define OPTOMECH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "optomech/constants.hpp"

namespace optomech {

// Deterministic, splittable PRNG used for all noise synthesis.
// Algorithm: splitmix64 for the uniform stream, trigonometric Box-Muller
// for Gaussian variates. Substreams are derived from (seed, index) with the
// splitmix64 finalizer, so per-block / per-source streams are independent of
// evaluation order. Not cryptographic; reproducibility is the requirement.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal variate.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_double(); // (0, 1]
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    have_spare_ = true;
    spare_ = r * std::sin(k_two_pi * u2);
    return r * std::cos(k_two_pi * u2);
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 s(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return s.next_u64();
  }

  // Stable stream index for named substreams (FNV-1a).
  static std::uint64_t stream_index(const std::string& name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) {
      h = (h ^ c) * 0x100000001B3ULL;
    }
    return h;
  }

  static constexpr const char* algorithm_name() {
    return "splitmix64+box-muller";
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace optomech

#endif
