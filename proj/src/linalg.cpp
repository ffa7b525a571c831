#include "bke/linalg.hpp"

#include <algorithm>
#include <array>

namespace bke {

double JitteredCholesky::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

JitteredCholesky cholesky_with_jitter(const Eigen::Ref<const Matrix>& a) {
  if (a.rows() != a.cols()) throw InvalidInput("Cholesky of a non-square matrix");
  if (!a.allFinite()) throw ConditioningError("matrix to factor has non-finite entries");
  const auto n = a.rows();
  double scale = a.trace() / static_cast<double>(std::max<Eigen::Index>(n, 1));
  if (!(scale > 0)) scale = std::max(a.diagonal().cwiseAbs().maxCoeff(), 1e-300);

  constexpr std::array<double, 4> kJitter = {0.0, 1e-10, 1e-9, 1e-8};
  JitteredCholesky out;
  for (double rel : kJitter) {
    Matrix work = a;
    out.jitter = rel * scale;
    work.diagonal().array() += out.jitter;
    out.llt.compute(work);
    if (out.llt.info() == Eigen::Success &&
        (out.llt.matrixLLT().diagonal().array() > 0).all()) {
      return out;
    }
  }
  throw ConditioningError("Cholesky factorization failed after jitter retries");
}

double min_eigenvalue(const Eigen::Ref<const Matrix>& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace bke
