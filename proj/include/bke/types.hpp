#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bke {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A single observation: one row of a data matrix, or any row vector.
using ConstPoint = Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

/// Bad arguments: dimension mismatch, non-finite values, violated preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The data cannot support the requested quantity (e.g. all points identical).
class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky factorization failed even after the bounded jitter retries.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every objective evaluation was -inf or degenerate.
class OptimizationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Width of the Gaussian prior measure in the limit eta -> infinity.
inline constexpr double kLebesgueLimit = std::numeric_limits<double>::infinity();

/// Hyperparameters of the isotropic squared-exponential embedding model.
///
/// `theta` is the lengthscale of k(x,y) = exp(-|x-y|^2 / (2 theta^2)).
/// `eta` is the width of the measure nu(du) = exp(-|u|^2 / (2 eta^2)) du used to
/// build the prior kernel r as a self-convolution of k; kLebesgueLimit selects
/// the stationary Lebesgue form. `tau2` is the likelihood variance, so that the
/// empirical embedding at a point has noise variance tau2 / n.
struct SEKernelParams {
  double theta = 1.0;
  double eta = kLebesgueLimit;
  double tau2 = 1.0;

  [[nodiscard]] bool lebesgue() const { return std::isinf(eta) && eta > 0; }

  void validate() const {
    if (!(theta > 0) || !std::isfinite(theta)) {
      throw InvalidInput("lengthscale theta must be positive and finite");
    }
    if (!(eta > 0) || std::isnan(eta)) {
      throw InvalidInput("prior-measure width eta must be positive");
    }
    if (!(tau2 > 0) || !std::isfinite(tau2)) {
      throw InvalidInput("likelihood variance tau2 must be positive and finite");
    }
  }
};

inline void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + " contains non-finite values");
  }
}

}  // namespace bke
