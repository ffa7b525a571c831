#pragma once

#include "bke/pseudolik.hpp"
#include "bke/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace bke {

class Rng;

/// Log-uniform grid of `count` lengthscales on [lo, hi].
struct LogGrid {
  double lo = 0.05;
  double hi = 50.0;
  int count = 60;

  void validate() const;
  [[nodiscard]] std::vector<double> points() const;
};

struct CurvePoint {
  double theta;
  double loglik;
};

struct BKLResult {
  double theta_hat = 0.0;
  double tau2 = 0.0;
  double best_loglik = 0.0;
  std::vector<CurvePoint> curve;     ///< grid evaluations, theta increasing
  std::vector<double> local_optima;  ///< thetas of interior grid maxima
};

struct BKLOptions {
  bool refine = true;
  double rel_tol = 1e-3;  ///< golden-section stopping tolerance, relative in theta
  double eta = kLebesgueLimit;
};

/// Maximize `objective` over a log grid, then refine the best bracket by
/// golden-section search in log(theta). Ties go to the smaller theta.
/// Throws OptimizationFailed when every grid value is -inf or NaN.
BKLResult maximize_on_log_grid(const std::function<double(double)>& objective, const LogGrid& grid,
                               const BKLOptions& options = {});

/// Maximum marginal pseudolikelihood lengthscale for fixed tau2.
BKLResult bkl_optimize(const Eigen::Ref<const Matrix>& data, const Landmarks& landmarks, double tau2,
                       const LogGrid& grid, const BKLOptions& options = {});

struct HyperDraw {
  double theta;
  double tau2;
};

struct HyperPosterior {
  std::vector<HyperDraw> draws;  ///< chain-major, post-warmup, thinned
  int chains = 0;
  double acceptance_rate = 0.0;  ///< accepted / proposed over post-warmup iterations
  long accepted = 0;
  long proposed = 0;
  int warmup_discarded = 0;      ///< per chain
  double rhat_theta = 0.0;
  double rhat_tau2 = 0.0;        ///< NaN when tau2 is held fixed
  double eta = kLebesgueLimit;
};

struct MHOptions {
  int iters = 400;
  int warmup = 200;
  int chains = 4;
  std::uint64_t seed = 0;
  double proposal_scale = 0.15;
  int thin = 1;
  std::optional<double> fixed_tau2;  ///< sample theta only
  double eta = kLebesgueLimit;

  void validate() const;
};

/// Log-likelihood of (theta, tau2); -inf for invalid/degenerate values.
using HyperLogLik = std::function<double(double theta, double tau2)>;

/// Random-walk Metropolis on (log theta, log tau2) with Gamma(1,1) priors on
/// theta and tau2. Chain c uses the stream Rng::derived(seed, c) and starts
/// from log-parameters drawn uniformly on (-2, 2).
HyperPosterior mh_sample(const HyperLogLik& loglik, const MHOptions& options);

/// mh_sample with the marginal pseudolikelihood of `data` as likelihood.
HyperPosterior mh_sample(const Eigen::Ref<const Matrix>& data, const Landmarks& landmarks,
                         const MHOptions& options);

struct ChainResult {
  Matrix states;  ///< iters x dim
  long accepted = 0;
};

/// Symmetric Gaussian random-walk Metropolis chain on R^d.
ChainResult metropolis_chain(const std::function<double(const Vector&)>& log_density, Vector init,
                             int iters, double scale, Rng& rng);

/// Split-Rhat over equal-length chains.
double split_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace bke
