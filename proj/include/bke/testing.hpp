#pragma once

#include "bke/learn.hpp"
#include "bke/types.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace bke {

enum class MMDVariant { Biased, Unbiased };

/// Squared MMD between the empirical embeddings of x and y.
/// Biased: mean(Kxx) + mean(Kyy) - 2 mean(Kxy). Unbiased: the Kxx and Kyy
/// means exclude the diagonal.
double mmd2(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
            const SEKernelParams& params, MMDVariant variant);

/// Biased HSIC, (1/n^2) trace(K H L H) with H = I - (1/n) 1 1^T.
double hsic(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
            const SEKernelParams& params_x, const SEKernelParams& params_y);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;  ///< (1 + #{perm >= observed}) / (1 + n_permutations)
  int n_permutations = 0;
  double alpha = 0.05;
  bool reject = false;   ///< p_value <= alpha
  SEKernelParams kernel;
  std::optional<SEKernelParams> kernel_y;  ///< HSIC only
};

struct PermutationConfig {
  int n_permutations = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two-sample test: pool x and y, re-split by seeded permutations that keep
/// the sample sizes.
TestResult mmd_permutation_test(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                                const SEKernelParams& params, MMDVariant variant,
                                const PermutationConfig& cfg);

/// Independence test: permute the rows of y.
TestResult hsic_permutation_test(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                                 const SEKernelParams& params_x, const SEKernelParams& params_y,
                                 const PermutationConfig& cfg);

/// p-value with the add-one correction; ties count as exceedances.
double permutation_p_value(double observed, const std::vector<double>& permuted);

/// Null statistics from the pooled Gram matrix (first nx rows are x).
/// Permutation b shuffles with Rng::derived(seed, b); permutations run in
/// parallel, each one serially, so the result does not depend on threads.
std::vector<double> mmd_permutation_statistics(const Matrix& pooled_gram, Eigen::Index nx,
                                               MMDVariant variant, int n_permutations,
                                               std::uint64_t seed);

/// MMD^2 of the split where in_x[i] marks the rows belonging to x.
double mmd2_from_gram(const Matrix& pooled_gram, const std::vector<char>& in_x, MMDVariant variant);

/// Null statistics (1/n^2) sum_ij Kc_ij L_{pi(i) pi(j)} for centred Kc.
std::vector<double> hsic_permutation_statistics(const Matrix& centred_k, const Matrix& l,
                                                int n_permutations, std::uint64_t seed);

/// H K H.
Matrix double_centre(const Matrix& k);

/// Pointwise credible band of the witness function mu_P - mu_Q.
struct WitnessBand {
  Matrix grid;
  Vector mean;
  Vector lower;
  Vector upper;
  double level = 0.8;
  int n_draws = 0;

  /// Grid points where the band does not contain 0.
  [[nodiscard]] std::vector<bool> excludes_zero() const;
  [[nodiscard]] double excluded_fraction() const;
};

using HyperSource = std::variant<SEKernelParams, HyperPosterior>;

/// Monte Carlo band: each draw picks hyperparameters (fixed, or uniformly from
/// the posterior draws), samples one function from each posterior embedding
/// on `grid` and takes the difference. Bounds are the (1 -+ level)/2 pointwise
/// quantiles of the draws; the mean is their pointwise average.
WitnessBand witness_band(const Eigen::Ref<const Matrix>& data_p, const Eigen::Ref<const Matrix>& data_q,
                         const Eigen::Ref<const Matrix>& grid, const HyperSource& hyper, double level,
                         int n_draws, std::uint64_t seed);

}  // namespace bke
