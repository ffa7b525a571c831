#include "bke/random.hpp"

#include <cmath>
#include <numbers>

namespace bke {

namespace {
// splitmix64 finalizer; decorrelates (seed, index) pairs.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

Rng Rng::derived(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix(mix(seed) ^ (index * 0xd1b54a32d192ed03ULL + 1)));
}

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t Rng::index(std::uint64_t n) {
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::laplace(double scale) {
  const double u = uniform() - 0.5;
  const double s = u < 0 ? -1.0 : 1.0;
  return -scale * s * std::log1p(-2.0 * std::abs(u));
}

}  // namespace bke
