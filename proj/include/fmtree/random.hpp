#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fmtree {

/// Seeded random source with platform-independent derived distributions.
///
/// The standard library distributions are implementation-defined, so
/// uniform, integer and normal draws are derived here directly from the
/// mt19937_64 stream. A given seed yields the same sequence everywhere.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal (Box-Muller, one value cached).
  double normal();

  template <typename T> void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T> void shuffle(std::vector<T>& items) { shuffle(std::span<T>(items)); }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Indices 0..n-1 in seeded random order.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

} // namespace fmtree
