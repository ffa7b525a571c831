#include "bke/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

namespace bke {

namespace {
std::atomic<int> g_override{0};

int env_cap() {
  const char* env = std::getenv("BKE_THREADS");
  if (env == nullptr) return 0;
  try {
    const int v = std::stoi(env);
    return v > 0 ? v : 0;
  } catch (...) {
    return 0;
  }
}
}  // namespace

int thread_count() {
  if (const int o = g_override.load(); o > 0) return o;
  const int hw = std::max(1, omp_get_max_threads());
  const int cap = env_cap();
  return cap > 0 ? std::min(cap, hw) : hw;
}

void set_thread_count(int n) { g_override.store(std::max(0, n)); }

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace bke
