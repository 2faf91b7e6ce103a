#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace gmbayes {

// Deterministic, splittable random stream: xoshiro256++ state initialized
// from (seed, stream) via SplitMix64.  Every consumer that needs independent
// draws derives its own stream instead of sharing a generator, so results do
// not depend on evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr std::string_view algorithm() { return "xoshiro256++"; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Independent generator for sub-task `substream` of this stream.
  Rng derive(std::uint64_t substream) const;

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Unbiased integer in [0, bound); rejection sampling, bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Standard normal via Box-Muller (second value of each pair is cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace gmbayes
