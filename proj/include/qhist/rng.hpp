#pragma once

#include <cstdint>

namespace qhist {

// Counter-based generator: the n-th output of stream (seed, stream) is
// mix64(key + n * kGolden) with key = mix64(seed ^ mix64(stream + kStreamSalt)).
// mix64 is the SplitMix64 finalizer. Integer-only, so identical on every
// platform; derived streams are independent by construction.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; caches the second variate.
  double normal();

  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix64(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

// Seed of the per-sample stream used by parallel sample loops.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace qhist
