#pragma once

#include "bke/types.hpp"

namespace bke {

/// Squared Euclidean distance between two points of equal dimension.
double squared_distance(ConstPoint x, ConstPoint y);

/// Base kernel k(x,y) = exp(-|x-y|^2 / (2 theta^2)).
double se_eval(ConstPoint x, ConstPoint y, const SEKernelParams& params);

/// Gradient of k(x,y) with respect to x: -k(x,y) (x - y) / theta^2.
Eigen::RowVectorXd se_grad_x(ConstPoint x, ConstPoint y, const SEKernelParams& params);

/// Prior kernel r(x,y) = \int k(x,u) k(u,y) nu(du).
///
/// Lebesgue limit: pi^{D/2} theta^D exp(-|x-y|^2 / (4 theta^2)).
/// Gaussian nu of width eta: the same stationary factor with normalization
/// (2 pi)^{D/2} (2/theta^2 + 1/eta^2)^{-D/2}, times the nonstationary factor
/// exp(-|(x+y)/2|^2 / (2 (theta^2/2 + eta^2))).
double r_eval(ConstPoint x, ConstPoint y, const SEKernelParams& params);

enum class GramKind { K, R };

/// Square Gram matrix over the rows of `points`.
Matrix gram(const Eigen::Ref<const Matrix>& points, const SEKernelParams& params, GramKind kind);

/// Cross Gram matrix, entry (i,j) = kernel(a_i, b_j).
Matrix gram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
            const SEKernelParams& params, GramKind kind);

/// Which kernel parameterization the median distance is meant for:
/// NoHalf means exp(-d^2 / l^2), Half means exp(-d^2 / (2 l^2)).
enum class MedianMode { NoHalf, Half };

/// Median pairwise distance l over pairs i<j, converted to the lengthscale
/// theta that reproduces the chosen parameterization under se_eval
/// (NoHalf: l/sqrt(2); Half: l). Throws DegenerateData when l == 0.
double median_heuristic(const Eigen::Ref<const Matrix>& data, MedianMode mode);

namespace detail {
/// Entry-wise kernel value from a squared distance; shared by the parallel
/// and reference Gram builders so that both produce identical bits.
struct KernelEntry {
  explicit KernelEntry(const SEKernelParams& p, Eigen::Index dim, GramKind kind);
  double operator()(ConstPoint x, ConstPoint y) const;

  GramKind kind;
  double inv_two_theta2;   // 1 / (2 theta^2)
  double inv_four_theta2;  // 1 / (4 theta^2)
  double r_norm;           // normalization of r
  double inv_two_nonstat;  // 1 / (2 (theta^2/2 + eta^2)), 0 in the Lebesgue limit
};
void check_same_dim(Eigen::Index a, Eigen::Index b);
}  // namespace detail

}  // namespace bke
