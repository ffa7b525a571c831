#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace bke {

/// Seeded generator with platform-independent variates.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so uniform, normal and index
/// variates are derived here from raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for replicate `index` of a computation seeded with `seed`.
  static Rng derived(std::uint64_t seed, std::uint64_t index);

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller; one engine pair per call pair).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  /// Laplace(0, b) by inverse CDF.
  double laplace(double scale);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bke
