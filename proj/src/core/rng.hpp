#ifndef EQHMM_CORE_RNG_HPP
#define EQHMM_CORE_RNG_HPP

#include <cstdint>

namespace eqhmm {

/// SplitMix64 (Steele, Lea & Flood / Vigna's public-domain constants).
/// Deterministic given the seed and portable across platforms; substreams
/// are derived by offsetting the seed with a fixed per-purpose tag.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as the argument of log().
  double next_double_open() { return 1.0 - next_double(); }

private:
  std::uint64_t state_;
};

/// Substream seed for one class of sampled variable (states, times, ...).
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64(seed ^ (tag * 0x9e3779b97f4a7c15ULL)).next_u64();
}

}  // namespace eqhmm

#endif
