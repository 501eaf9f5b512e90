#pragma once

#include <cstdint>

namespace dlsim {

// Counter-based random streams. Every draw in the simulator comes from a
// stream keyed by (seed, purpose, a, b) -- typically (experiment seed,
// purpose, epoch, node) -- so reruns are bit-identical and streams are
// independent of evaluation order.
enum class StreamPurpose : std::uint64_t {
  class_means = 1,
  train_samples = 2,
  test_samples = 3,
  init_params = 4,
  noisy_z = 5,
  minibatch = 6,
  test_only = 99,  // reserved for test harness use
};

namespace detail {
// splitmix64 finalizer; the usual avalanche constants.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t a = 0,
               std::uint64_t b = 0)
      : RandomStream(seed, static_cast<std::uint64_t>(purpose), a, b) {}

  RandomStream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a = 0,
               std::uint64_t b = 0) {
    key_ = detail::mix64(seed);
    key_ = detail::mix64(key_ ^ purpose);
    key_ = detail::mix64(key_ ^ a);
    key_ = detail::mix64(key_ ^ b);
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + counter_++); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. One value per call; the sine half of the
  // pair is discarded to keep the draw count predictable.
  double normal();

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace dlsim
