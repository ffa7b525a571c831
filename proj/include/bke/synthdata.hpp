#pragma once

#include "bke/types.hpp"

#include <cstdint>
#include <utility>

namespace bke {

/// Mixture of bivariate Gaussians centred on a square grid.
///
/// Unrotated components have identity covariance. Rotated components have
/// eigenvalues {sqrt(eps), 1/sqrt(eps)} (ratio eps, unit geometric mean) in a
/// frame rotated by an angle drawn uniformly on [0, pi) per component.
/// eps < 1 is read as 1/eps.
struct GridMixtureSpec {
  int grid_side = 3;
  double spacing = 12.0;
  double eps = 1.0;
  int per_component = 100;
  bool rotated = false;
};

/// grid_side^2 * per_component rows, component by component (stratified).
Matrix gen_grid_mixture(const GridMixtureSpec& spec, std::uint64_t seed);

/// n draws from N(0,1) and n draws from Laplace(0, sqrt(0.5)); both have
/// mean 0 and variance 1.
std::pair<Matrix, Matrix> gen_normal_laplace(Eigen::Index n, std::uint64_t seed);

}  // namespace bke
