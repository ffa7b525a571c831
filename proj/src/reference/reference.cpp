#include "bke/reference.hpp"

#include "bke/parallel.hpp"
#include "bke/random.hpp"

#include <numeric>

namespace bke::reference {

Matrix gram(const Eigen::Ref<const Matrix>& points, const SEKernelParams& params, GramKind kind) {
  const detail::KernelEntry entry(params, points.cols(), kind);
  const Eigen::Index n = points.rows();
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g(i, j) = g(j, i) = entry(points.row(i), points.row(j));
    }
  }
  return g;
}

Matrix gram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
            const SEKernelParams& params, GramKind kind) {
  detail::check_same_dim(a.cols(), b.cols());
  const detail::KernelEntry entry(params, a.cols(), kind);
  Matrix g(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) g(i, j) = entry(a.row(i), b.row(j));
  }
  return g;
}

double log_jacobian_sum(const Eigen::Ref<const Matrix>& data, const Landmarks& z,
                        const SEKernelParams& params) {
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double v = gamma(data.row(i), z, params).log_value;
    if (std::isinf(v)) return -std::numeric_limits<double>::infinity();
    logs.push_back(v);
  }
  return pairwise_sum(logs);
}

std::vector<double> mmd_permutation_statistics(const Matrix& pooled_gram, Eigen::Index nx,
                                               MMDVariant variant, int n_permutations,
                                               std::uint64_t seed) {
  const Eigen::Index total = pooled_gram.rows();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_permutations));
  for (int b = 0; b < n_permutations; ++b) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(total));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(b));
    rng.shuffle(perm);
    std::vector<char> in_x(static_cast<std::size_t>(total), 0);
    for (Eigen::Index k = 0; k < nx; ++k) in_x[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = 1;
    out.push_back(mmd2_from_gram(pooled_gram, in_x, variant));
  }
  return out;
}

std::vector<double> hsic_permutation_statistics(const Matrix& centred_k, const Matrix& l,
                                                int n_permutations, std::uint64_t seed) {
  const Eigen::Index n = l.rows();
  const double nn = static_cast<double>(n);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_permutations));
  for (int b = 0; b < n_permutations; ++b) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(b));
    rng.shuffle(perm);
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        s += centred_k(i, j) * l(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
      }
    }
    out.push_back(s / (nn * nn));
  }
  return out;
}

}  // namespace bke::reference
