#include "bke/pseudolik.hpp"

#include "bke/kernels.hpp"
#include "bke/linalg.hpp"
#include "bke/parallel.hpp"
#include "bke/random.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

namespace bke {

namespace {
constexpr double kDuplicateTol = 1e-12;

bool near_duplicate(ConstPoint a, ConstPoint b) {
  return std::sqrt(squared_distance(a, b)) <= kDuplicateTol;
}

void check_data(const Eigen::Ref<const Matrix>& data, const Landmarks& z) {
  if (data.rows() < 1) throw InvalidInput("pseudolikelihood needs at least one observation");
  detail::check_same_dim(data.cols(), z.dim());
  require_finite(data, "data");
}
}  // namespace

Landmarks::Landmarks(Matrix points) : points_(std::move(points)) {
  if (points_.cols() < 1) throw InvalidInput("landmarks must have dimension >= 1");
  if (points_.rows() < points_.cols()) throw InvalidInput("need at least D landmarks");
  require_finite(points_, "landmarks");
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points_.rows(); ++j) {
      if (near_duplicate(points_.row(i), points_.row(j))) {
        throw InvalidInput("landmarks contain duplicate rows");
      }
    }
  }
}

Vector phi_z(ConstPoint x, const Landmarks& z, const SEKernelParams& params) {
  detail::check_same_dim(x.size(), z.dim());
  Vector out(z.count());
  for (Eigen::Index l = 0; l < z.count(); ++l) out[l] = se_eval(x, z.points().row(l), params);
  return out;
}

namespace {
constexpr double kNoRow = -std::numeric_limits<double>::infinity();

// Rescale v to unit norm, folding the norm into the log scale c.
void normalize(double* v, Eigen::Index dim, double& c) {
  double nv = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) nv += v[i] * v[i];
  nv = std::sqrt(nv);
  if (!(nv > 0) || !std::isfinite(nv)) {
    c = kNoRow;
    std::fill(v, v + dim, 0.0);
    return;
  }
  for (Eigen::Index i = 0; i < dim; ++i) v[i] /= nv;
  c += std::log(nv);
}

// Givens rotation zeroing b[k] against a[k], for rows stored as exp(c) * v.
// a becomes (alpha a + beta b)/r and b becomes (alpha b - beta a)/r, with
// alpha, beta and r handled through their logs, so rows of wildly different
// magnitude neither underflow nor swamp each other. In the last column b is
// left as zero and need not be formed.
void rotate(double* a, double& ca, double* b, double& cb, Eigen::Index k, Eigen::Index dim, double* tmp) {
  const bool last = k + 1 == dim;
  const double ak = a[k], bk = b[k], ca0 = ca;
  const double la = ca + std::log(std::abs(ak));
  const double lb = cb + std::log(std::abs(bk));
  const double hi = std::max(la, lb), lo = std::min(la, lb);
  // beta/alpha below e^-40: a is unchanged to working precision.
  const bool a_fixed = lb < la - 40.0;
  const double lr = a_fixed ? la : hi + 0.5 * std::log1p(std::exp(2.0 * (lo - hi)));

  if (!last) {
    for (Eigen::Index i = 0; i < dim; ++i) tmp[i] = ak * b[i] - bk * a[i];
    tmp[k] = 0.0;
  }
  if (!a_fixed) {
    const double ea = la + ca, eb = lb + cb;
    const double top = std::max(ea, eb);
    const double wa = std::copysign(std::exp(ea - top), ak);
    const double wb = std::copysign(std::exp(eb - top), bk);
    for (Eigen::Index i = 0; i < dim; ++i) a[i] = wa * a[i] + wb * b[i];
    ca = top - lr;
    normalize(a, dim, ca);
  }
  if (last) {
    cb = kNoRow;
    return;
  }
  std::copy(tmp, tmp + dim, b);
  cb = ca0 + cb - lr;
  normalize(b, dim, cb);
}
}  // namespace

GammaEval gamma(ConstPoint x, const Landmarks& z, const SEKernelParams& params) {
  params.validate();
  detail::check_same_dim(x.size(), z.dim());
  if (!x.allFinite()) throw InvalidInput("non-finite input coordinate");
  const Eigen::Index m = z.count();
  const Eigen::Index dim = z.dim();
  const double t2 = params.theta * params.theta;

  // Row l of J is k(x,z_l) (z_l - x)/theta^2, kept as a log scale times a
  // unit vector.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor v(m, dim);
  Vector c(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    v.row(l) = z.points().row(l) - x;
    c[l] = -squared_distance(x, z.points().row(l)) / (2.0 * t2) - std::log(t2);
    normalize(&v(l, 0), dim, c[l]);
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return c[a] > c[b]; });

  // Row-by-row QR; r holds the D rows of the triangular factor.
  RowMajor r = RowMajor::Zero(dim, dim);
  Vector rc = Vector::Constant(dim, kNoRow);
  std::vector<double> tmp(static_cast<std::size_t>(dim));
  for (Eigen::Index l : order) {
    double* b = &v(l, 0);
    double& cb = c[l];
    for (Eigen::Index k = 0; k < dim && cb != kNoRow; ++k) {
      if (b[k] == 0.0) continue;
      if (rc[k] == kNoRow) {
        std::copy(b, b + dim, &r(k, 0));
        rc[k] = cb;
        break;
      }
      rotate(&r(k, 0), rc[k], b, cb, k, dim, tmp.data());
    }
  }

  GammaEval out;
  double log_value = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (rc[k] == kNoRow || r(k, k) == 0.0) {
      out.degenerate = true;
      out.log_value = kNoRow;
      out.value = 0.0;
      return out;
    }
    log_value += rc[k] + std::log(std::abs(r(k, k)));
  }
  out.log_value = log_value;
  out.value = std::exp(log_value);
  return out;
}

double log_jacobian_sum(const Eigen::Ref<const Matrix>& data, const Landmarks& z,
                        const SEKernelParams& params) {
  check_data(data, z);
  params.validate();
  const Eigen::Index n = data.rows();
  std::vector<double> logs(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index i = 0; i < n; ++i) {
    logs[static_cast<std::size_t>(i)] = gamma(data.row(i), z, params).log_value;
  }
  for (double v : logs) {
    if (std::isinf(v)) return -std::numeric_limits<double>::infinity();
  }
  return pairwise_sum(logs);
}

namespace {
PseudolikEval finish(double gaussian, double jacobian) {
  PseudolikEval out;
  out.log_gaussian_term = gaussian;
  out.log_jacobian_term = jacobian;
  out.degenerate = !std::isfinite(jacobian) || !std::isfinite(gaussian);
  out.total = out.degenerate ? -std::numeric_limits<double>::infinity() : gaussian + jacobian;
  return out;
}
}  // namespace

PseudolikEval log_pseudolik_naive(const Eigen::Ref<const Matrix>& data, const Landmarks& z,
                                  const SEKernelParams& params) {
  check_data(data, z);
  params.validate();
  const Eigen::Index n = data.rows();
  const Eigen::Index m = z.count();
  if (n * m > kNaiveGuard) throw InvalidInput("naive pseudolikelihood limited to m*n <= 2000");

  const Matrix kxz = gram(data, z.points(), params, GramKind::K);  // n x m
  const Matrix rzz = gram(z.points(), params, GramKind::R);
  // Observation-major stacking: block i of the vector is phi_z(x_i).
  Vector v(n * m);
  for (Eigen::Index i = 0; i < n; ++i) v.segment(i * m, m) = kxz.row(i).transpose();
  Matrix c(n * m, n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) c.block(i * m, k * m, m, m) = rzz;
  }
  c.diagonal().array() += params.tau2;

  const JitteredCholesky chol = cholesky_with_jitter(c);
  const double quad = chol.llt.matrixL().solve(v).squaredNorm();
  const double dim = static_cast<double>(n * m);
  const double gaussian = -0.5 * (dim * std::log(2.0 * std::numbers::pi) + chol.log_det() + quad);
  return finish(gaussian, log_jacobian_sum(data, z, params));
}

PseudolikEval log_pseudolik_fast(const Eigen::Ref<const Matrix>& data, const Landmarks& z,
                                 const SEKernelParams& params) {
  check_data(data, z);
  params.validate();
  const double n = static_cast<double>(data.rows());
  const double m = static_cast<double>(z.count());
  const double tau2 = params.tau2;

  const Matrix kxz = gram(data, z.points(), params, GramKind::K);  // n x m
  Matrix a = gram(z.points(), params, GramKind::R);
  a.diagonal().array() += tau2 / n;
  const JitteredCholesky chol = cholesky_with_jitter(a);

  const Vector mu = kxz.colwise().mean().transpose();  // (1/n) K_zx 1
  const double quad = mu.dot(chol.solve(mu));
  const double frob = kxz.squaredNorm();
  const double gaussian =
      -0.5 * (chol.log_det() + quad + frob / tau2 - n * mu.squaredNorm() / tau2 + m * std::log(n) +
              m * (n - 1.0) * std::log(tau2) + m * n * std::log(2.0 * std::numbers::pi));
  return finish(gaussian, log_jacobian_sum(data, z, params));
}

LandmarkSplit choose_landmarks(const Eigen::Ref<const Matrix>& data, Eigen::Index m,
                               std::uint64_t seed) {
  const Eigen::Index n = data.rows();
  if (m < 1 || m < data.cols()) throw InvalidInput("landmark count must be >= D and >= 1");
  if (m >= n) throw InvalidInput("landmark count must be smaller than the number of rows");
  require_finite(data, "data");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(seed);
  rng.shuffle(perm);

  std::vector<Eigen::Index> chosen;
  chosen.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index row : perm) {
    const bool dup = std::any_of(chosen.begin(), chosen.end(), [&](Eigen::Index c) {
      return near_duplicate(data.row(row), data.row(c));
    });
    if (!dup) chosen.push_back(row);
    if (static_cast<Eigen::Index>(chosen.size()) == m) break;
  }
  if (static_cast<Eigen::Index>(chosen.size()) < m) {
    throw DegenerateData("fewer distinct rows than requested landmarks");
  }

  std::vector<bool> is_landmark(static_cast<std::size_t>(n), false);
  for (Eigen::Index c : chosen) is_landmark[static_cast<std::size_t>(c)] = true;
  std::vector<Eigen::Index> rest;
  rest.reserve(static_cast<std::size_t>(n - m));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!is_landmark[static_cast<std::size_t>(i)]) rest.push_back(i);
  }

  Matrix zpts(m, data.cols());
  for (Eigen::Index r = 0; r < m; ++r) zpts.row(r) = data.row(chosen[static_cast<std::size_t>(r)]);
  Matrix remaining(static_cast<Eigen::Index>(rest.size()), data.cols());
  for (std::size_t r = 0; r < rest.size(); ++r) remaining.row(static_cast<Eigen::Index>(r)) = data.row(rest[r]);
  return {Landmarks(std::move(zpts)), std::move(remaining), std::move(chosen), std::move(rest)};
}

Eigen::Index default_landmark_count(Eigen::Index n, Eigen::Index dim) {
  const Eigen::Index tenth = (n + 9) / 10;
  return std::max(dim, std::min<Eigen::Index>(20, tenth));
}

}  // namespace bke
