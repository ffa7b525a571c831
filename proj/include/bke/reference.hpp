#pragma once

// Serial reference implementations of the OpenMP kernels. They share the
// per-entry arithmetic with the parallel versions and must agree with them
// bit for bit; tests and the benchmark use them, the CLI does not.

#include "bke/kernels.hpp"
#include "bke/pseudolik.hpp"
#include "bke/testing.hpp"

namespace bke::reference {

Matrix gram(const Eigen::Ref<const Matrix>& points, const SEKernelParams& params, GramKind kind);
Matrix gram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
            const SEKernelParams& params, GramKind kind);

double log_jacobian_sum(const Eigen::Ref<const Matrix>& data, const Landmarks& z,
                        const SEKernelParams& params);

std::vector<double> mmd_permutation_statistics(const Matrix& pooled_gram, Eigen::Index nx,
                                               MMDVariant variant, int n_permutations,
                                               std::uint64_t seed);

std::vector<double> hsic_permutation_statistics(const Matrix& centred_k, const Matrix& l,
                                                int n_permutations, std::uint64_t seed);

}  // namespace bke::reference
