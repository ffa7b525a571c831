#pragma once

#include "bke/types.hpp"

namespace bke {

/// Empirical kernel mean embedding (1/n) sum_i k(., x_i) of a sample.
struct EmpiricalEmbedding {
  Matrix data;  ///< n x D, n >= 1
  SEKernelParams params;
};

/// Evaluate the empirical embedding at each query row.
Vector empirical_eval(const EmpiricalEmbedding& emb, const Eigen::Ref<const Matrix>& query);

/// Gaussian posterior over the embedding at a finite set of points.
struct PosteriorEmbedding {
  Matrix eval_points;  ///< p x D
  Vector mean;         ///< p
  Matrix covariance;   ///< p x p, symmetric PSD up to jitter
};

/// Kernel used for the GP prior covariance. `Base` replaces r by k and exists
/// to check the equivalence with the shrinkage estimator; models use
/// `Convolution`.
enum class PriorKernel { Convolution, Base };

/// Conjugate posterior of the embedding at `query` given the empirical
/// embedding observed at the data points with noise variance tau2/n:
///   mean = R_qx (R + tau2/n I)^{-1} v,  cov = R_qq - R_qx (R + tau2/n I)^{-1} R_xq.
PosteriorEmbedding posterior(const EmpiricalEmbedding& emb, const Eigen::Ref<const Matrix>& query,
                             PriorKernel prior = PriorKernel::Convolution);

struct SKMSEConfig {
  double lambda = 0.0;  ///< >= 0
};

/// Spectral shrinkage estimator K_qx (K + n lambda I)^{-1} v, base kernel only.
Vector skmse_eval(const Eigen::Ref<const Matrix>& data, const SEKernelParams& params,
                  const SKMSEConfig& cfg, const Eigen::Ref<const Matrix>& query);

/// tau2 under which the Base-kernel posterior mean equals skmse_eval with
/// `lambda` on n points: tau2/n = n lambda.
inline double skmse_equivalent_tau2(double lambda, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  return nn * nn * lambda;
}

/// Posterior of mu_P - mu_Q from two independent posteriors on the same points.
PosteriorEmbedding witness(const PosteriorEmbedding& p, const PosteriorEmbedding& q);

}  // namespace bke
