#pragma once

#include <span>

namespace bke {

/// Number of OpenMP threads the library kernels use.
///
/// Defaults to the OpenMP maximum, capped by the BKE_THREADS environment
/// variable when it is set to a positive integer. set_thread_count overrides
/// both (0 restores the default).
int thread_count();
void set_thread_count(int n);

/// Pairwise (tree) summation in a fixed order, so that a sum of values
/// computed in parallel is reproducible regardless of thread count.
double pairwise_sum(std::span<const double> values);

}  // namespace bke
