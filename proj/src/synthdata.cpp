#include "bke/synthdata.hpp"

#include "bke/random.hpp"

#include <numbers>
#include <vector>

namespace bke {

Matrix gen_grid_mixture(const GridMixtureSpec& spec, std::uint64_t seed) {
  if (spec.grid_side < 1 || spec.per_component < 1) {
    throw InvalidInput("grid_side and per_component must be >= 1");
  }
  if (!(spec.spacing > 0) || !std::isfinite(spec.spacing)) throw InvalidInput("spacing must be positive");
  if (!(spec.eps > 0) || !std::isfinite(spec.eps)) throw InvalidInput("eps must be positive");

  const int components = spec.grid_side * spec.grid_side;
  const double eps = spec.eps < 1.0 ? 1.0 / spec.eps : spec.eps;
  const double major = std::sqrt(std::sqrt(eps));  // sqrt of eigenvalue sqrt(eps)
  const double minor = 1.0 / major;
  const double offset = 0.5 * (spec.grid_side - 1) * spec.spacing;

  Rng rng(seed);
  std::vector<double> angles(static_cast<std::size_t>(components));
  for (double& a : angles) a = std::numbers::pi * rng.uniform();

  Matrix out(static_cast<Eigen::Index>(components) * spec.per_component, 2);
  Eigen::Index row = 0;
  for (int c = 0; c < components; ++c) {
    const double cx = (c / spec.grid_side) * spec.spacing - offset;
    const double cy = (c % spec.grid_side) * spec.spacing - offset;
    const double ca = std::cos(angles[static_cast<std::size_t>(c)]);
    const double sa = std::sin(angles[static_cast<std::size_t>(c)]);
    for (int i = 0; i < spec.per_component; ++i, ++row) {
      double u = rng.normal();
      double v = rng.normal();
      if (spec.rotated) {
        u *= major;
        v *= minor;
        const double ru = ca * u - sa * v;
        const double rv = sa * u + ca * v;
        u = ru;
        v = rv;
      }
      out(row, 0) = cx + u;
      out(row, 1) = cy + v;
    }
  }
  return out;
}

std::pair<Matrix, Matrix> gen_normal_laplace(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("sample size must be >= 1");
  Rng rng(seed);
  Matrix p(n, 1);
  Matrix q(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) p(i, 0) = rng.normal();
  const double b = std::sqrt(0.5);
  for (Eigen::Index i = 0; i < n; ++i) q(i, 0) = rng.laplace(b);
  return {std::move(p), std::move(q)};
}

}  // namespace bke
