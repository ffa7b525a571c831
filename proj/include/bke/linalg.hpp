#pragma once

#include "bke/types.hpp"

namespace bke {

/// Cholesky factor of a symmetric matrix, possibly after diagonal jitter.
struct JitteredCholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;  ///< total amount added to the diagonal

  [[nodiscard]] double log_det() const;
  [[nodiscard]] Vector solve(const Eigen::Ref<const Vector>& b) const { return llt.solve(b); }
};

/// Factor `a` with the bounded jitter policy: try as is, then add
/// 1e-10 * trace/n, 1e-9 * trace/n, 1e-8 * trace/n to the diagonal.
/// Throws ConditioningError when all four attempts fail.
JitteredCholesky cholesky_with_jitter(const Eigen::Ref<const Matrix>& a);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::Ref<const Matrix>& a);

}  // namespace bke
