#include "bke/kernels.hpp"

#include "bke/parallel.hpp"

#include <algorithm>
#include <numbers>
#include <vector>

namespace bke {

namespace detail {

void check_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw InvalidInput("dimension mismatch between point sets");
  if (a < 1) throw InvalidInput("points must have dimension >= 1");
}

KernelEntry::KernelEntry(const SEKernelParams& p, Eigen::Index dim, GramKind k) : kind(k) {
  p.validate();
  const double t2 = p.theta * p.theta;
  const double d = static_cast<double>(dim);
  inv_two_theta2 = 1.0 / (2.0 * t2);
  inv_four_theta2 = 1.0 / (4.0 * t2);
  if (p.lebesgue()) {
    r_norm = std::pow(std::numbers::pi, d / 2.0) * std::pow(p.theta, d);
    inv_two_nonstat = 0.0;
  } else {
    const double prec = 2.0 / t2 + 1.0 / (p.eta * p.eta);
    r_norm = std::pow(2.0 * std::numbers::pi, d / 2.0) * std::pow(prec, -d / 2.0);
    inv_two_nonstat = 1.0 / (2.0 * (t2 / 2.0 + p.eta * p.eta));
  }
}

double KernelEntry::operator()(ConstPoint x, ConstPoint y) const {
  const double d2 = squared_distance(x, y);
  if (kind == GramKind::K) return std::exp(-d2 * inv_two_theta2);
  double e = -d2 * inv_four_theta2;
  if (inv_two_nonstat > 0.0) {
    const double m2 = (0.5 * (x + y)).squaredNorm();
    e -= m2 * inv_two_nonstat;
  }
  return r_norm * std::exp(e);
}

}  // namespace detail

double squared_distance(ConstPoint x, ConstPoint y) {
  detail::check_same_dim(x.size(), y.size());
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

namespace {
void check_point(ConstPoint x) {
  if (!x.allFinite()) throw InvalidInput("non-finite input coordinate");
}
}  // namespace

double se_eval(ConstPoint x, ConstPoint y, const SEKernelParams& params) {
  check_point(x);
  check_point(y);
  detail::check_same_dim(x.size(), y.size());
  return detail::KernelEntry(params, x.size(), GramKind::K)(x, y);
}

Eigen::RowVectorXd se_grad_x(ConstPoint x, ConstPoint y, const SEKernelParams& params) {
  const double k = se_eval(x, y, params);
  return -(k / (params.theta * params.theta)) * (x - y);
}

double r_eval(ConstPoint x, ConstPoint y, const SEKernelParams& params) {
  check_point(x);
  check_point(y);
  detail::check_same_dim(x.size(), y.size());
  return detail::KernelEntry(params, x.size(), GramKind::R)(x, y);
}

Matrix gram(const Eigen::Ref<const Matrix>& points, const SEKernelParams& params, GramKind kind) {
  require_finite(points, "points");
  detail::check_same_dim(points.cols(), points.cols());
  const detail::KernelEntry entry(params, points.cols(), kind);
  const Eigen::Index n = points.rows();
  Matrix g(n, n);
  // Each entry is computed once and mirrored; no cross-entry accumulation.
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = entry(points.row(i), points.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Matrix gram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
            const SEKernelParams& params, GramKind kind) {
  require_finite(a, "points");
  require_finite(b, "points");
  detail::check_same_dim(a.cols(), b.cols());
  const detail::KernelEntry entry(params, a.cols(), kind);
  const Eigen::Index n = a.rows();
  const Eigen::Index p = b.rows();
  Matrix g(n, p);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = entry(a.row(i), b.row(j));
  }
  return g;
}

double median_heuristic(const Eigen::Ref<const Matrix>& data, MedianMode mode) {
  require_finite(data, "data");
  const Eigen::Index n = data.rows();
  if (n < 2) throw InvalidInput("median heuristic needs at least two points");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back(std::sqrt(squared_distance(data.row(i), data.row(j))));
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  if (!(median > 0)) throw DegenerateData("median pairwise distance is zero");
  return mode == MedianMode::Half ? median : median / std::numbers::sqrt2;
}

}  // namespace bke
