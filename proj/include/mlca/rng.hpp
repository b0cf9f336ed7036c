#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace mlca {

/// Portable SplitMix64 stream. Each (seed, purpose) pair selects an
/// independent counter-based stream, so results do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view purpose);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_purpose(std::string_view purpose);

}  // namespace mlca
