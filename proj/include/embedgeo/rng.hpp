#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace embedgeo {

/// xoshiro256** seeded through SplitMix64. All sampling in the toolkit goes
/// through this type so results are reproducible from (seed, stream name)
/// in any language that implements the same two generators.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream derived from a root seed and a stable name, e.g.
  /// Rng::stream(17, "probe/negatives/LATIN").
  static Rng stream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  /// k distinct indices out of [0, n), in sampling order.
  std::vector<std::size_t> sample(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace embedgeo
