#pragma once

#include "bke/types.hpp"

#include <cstdint>
#include <vector>

namespace bke {

/// Fixed anchor points z_1..z_m of the feature map phi_z.
/// Invariants: m >= D, finite rows, no two rows within 1e-12 of each other.
class Landmarks {
 public:
  explicit Landmarks(Matrix points);

  [[nodiscard]] const Matrix& points() const { return points_; }
  [[nodiscard]] Eigen::Index count() const { return points_.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return points_.cols(); }

 private:
  Matrix points_;
};

/// phi_z(x) = [k(x, z_1), ..., k(x, z_m)].
Vector phi_z(ConstPoint x, const Landmarks& z, const SEKernelParams& params);

/// Jacobian volume of x -> phi_z(x).
struct GammaEval {
  double value = 0.0;      ///< sqrt(det(J^T J)); may underflow to 0
  double log_value = 0.0;  ///< -inf when J^T J is singular
  bool degenerate = false;
};

/// sqrt(det(J^T J)) with J the m x D Jacobian of phi_z at x. The log comes
/// from a Givens QR of J in which every row keeps its own log scale, so rows
/// whose kernel values differ by hundreds of orders of magnitude still
/// contribute and tiny kernel values do not underflow into a spurious zero.
GammaEval gamma(ConstPoint x, const Landmarks& z, const SEKernelParams& params);

/// Log marginal pseudolikelihood split into its two factors.
struct PseudolikEval {
  double log_gaussian_term = 0.0;
  double log_jacobian_term = 0.0;
  double total = 0.0;  ///< log_gaussian_term + log_jacobian_term
  bool degenerate = false;
};

/// Largest m*n for which the naive evaluation materializes the covariance.
inline constexpr Eigen::Index kNaiveGuard = 2000;

/// Reference evaluation: density of the stacked mn-vector
/// [phi_z(x_1); ...; phi_z(x_n)] under N(0, 1 1^T (x) R_zz + tau2 I).
PseudolikEval log_pseudolik_naive(const Eigen::Ref<const Matrix>& data, const Landmarks& z,
                                  const SEKernelParams& params);

/// Same quantity in O(m^3 + mn) through the Kronecker structure of the
/// covariance; only an m x m matrix is factored.
PseudolikEval log_pseudolik_fast(const Eigen::Ref<const Matrix>& data, const Landmarks& z,
                                 const SEKernelParams& params);

/// sum_i log gamma(x_i), evaluated in parallel and summed pairwise.
/// Returns -inf if any point is degenerate.
double log_jacobian_sum(const Eigen::Ref<const Matrix>& data, const Landmarks& z,
                        const SEKernelParams& params);

struct LandmarkSplit {
  Landmarks landmarks;
  Matrix remaining;                             ///< working data, n - m rows
  std::vector<Eigen::Index> landmark_rows;      ///< row indices into the input
  std::vector<Eigen::Index> remaining_rows;     ///< ascending
};

/// Hold out m distinct rows (seeded) as landmarks; rows that duplicate an
/// already chosen landmark are skipped. Throws InvalidInput when m < D or
/// m >= n, DegenerateData when fewer than m distinct rows exist.
LandmarkSplit choose_landmarks(const Eigen::Ref<const Matrix>& data, Eigen::Index m,
                               std::uint64_t seed);

/// Default landmark count for n observations in D dimensions.
Eigen::Index default_landmark_count(Eigen::Index n, Eigen::Index dim);

}  // namespace bke
