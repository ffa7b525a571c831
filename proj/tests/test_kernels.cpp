#include "bke/kernels.hpp"
#include "bke/linalg.hpp"
#include "bke/parallel.hpp"
#include "bke/reference.hpp"

#include "helpers.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <numbers>

using namespace bke;
using bke::test::rel_err;

namespace {
Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

SEKernelParams theta(double t) { return SEKernelParams{t, kLebesgueLimit, 1.0}; }

// r(x,y) in one dimension by adaptive quadrature of k(x,u) k(u,y) nu(du).
double r_quadrature_1d(double x, double y, double th, double eta) {
  auto f = [&](double u) {
    return std::exp(-(x - u) * (x - u) / (2 * th * th)) * std::exp(-(u - y) * (u - y) / (2 * th * th)) *
           std::exp(-u * u / (2 * eta * eta));
  };
  const double inf = std::numeric_limits<double>::infinity();
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, 1e-13);
}

// Central difference of se_eval in coordinate d.
Eigen::RowVectorXd fd_grad(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y, const SEKernelParams& p,
                           double h) {
  Eigen::RowVectorXd g(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    Eigen::RowVectorXd xp = x, xm = x;
    xp[d] += h;
    xm[d] -= h;
    g[d] = (se_eval(xp, y, p) - se_eval(xm, y, p)) / (2 * h);
  }
  return g;
}
}  // namespace

TEST_CASE("se_eval: worked values") {
  CHECK(se_eval(row({0.3, -1.2}), row({0.3, -1.2}), theta(0.7)) == 1.0);
  CHECK(se_eval(row({0.0}), row({std::sqrt(2.0)}), theta(1.0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(se_eval(row({0, 0}), row({3, 4}), theta(2.5)) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("se_eval: symmetric, in (0,1], errors on bad input") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const Eigen::RowVectorXd x = test::normal_matrix(1, 3, rng, 2.0), y = test::normal_matrix(1, 3, rng, 2.0);
    const auto p = theta(test::log_uniform_in(rng, 0.1, 10));
    const double k = se_eval(x, y, p);
    CHECK(k == se_eval(y, x, p));
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
    CHECK(se_eval(x, x, p) == 1.0);
  }
  CHECK_THROWS_AS(se_eval(row({0.0, NAN}), row({0.0, 0.0}), theta(1)), InvalidInput);
  CHECK_THROWS_AS(se_eval(row({0.0}), row({0.0, 0.0}), theta(1)), InvalidInput);
  CHECK_THROWS_AS(se_eval(row({0.0}), row({1.0}), theta(-1)), InvalidInput);
  CHECK_THROWS_AS(se_eval(row({0.0}), row({1.0}), SEKernelParams{1.0, 0.0, 1.0}), InvalidInput);
  CHECK_THROWS_AS(se_eval(row({0.0}), row({1.0}), SEKernelParams{1.0, kLebesgueLimit, 0.0}), InvalidInput);
}

TEST_CASE("se_grad_x: matches central finite differences") {
  CHECK(se_grad_x(row({0.5, 1}), row({0.5, 1}), theta(1)).isZero(0.0));

  const double g = se_grad_x(row({1.0}), row({0.0}), theta(1))[0];
  CHECK(std::abs(g) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(rel_err(g, fd_grad(row({1.0}), row({0.0}), theta(1), 1e-5)[0]) < 1e-6);

  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Eigen::RowVectorXd x = test::normal_matrix(1, 2, rng, 0.5), y = test::normal_matrix(1, 2, rng, 0.5);
    const auto an = se_grad_x(x, y, theta(0.5));
    const auto fd = fd_grad(x, y, theta(0.5), 1e-5);
    CHECK((an - fd).norm() / fd.norm() < 1e-5);
  }
}

TEST_CASE("r_eval: Lebesgue-limit closed form") {
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  CHECK(std::abs(r_eval(row({0.0}), row({0.0}), theta(1)) - sqrt_pi) <= 1e-12 * sqrt_pi);
  CHECK(r_eval(row({0.0}), row({2.0}), theta(1)) == doctest::Approx(sqrt_pi * std::exp(-1.0)).epsilon(1e-14));
  // D = 2: pi * theta^2 at the origin.
  CHECK(r_eval(row({0, 0}), row({0, 0}), theta(1.5)) == doctest::Approx(std::numbers::pi * 2.25).epsilon(1e-14));
}

TEST_CASE("r_eval: finite eta matches quadrature") {
  const SEKernelParams p{0.8, 5.0, 1.0};
  CHECK(rel_err(r_eval(row({0.4}), row({-0.3}), p), r_quadrature_1d(0.4, -0.3, 0.8, 5.0)) < 1e-6);

  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const double th = test::log_uniform_in(rng, 0.2, 3.0);
    const double eta = test::log_uniform_in(rng, 0.3, 20.0);
    const double x = test::uniform_in(rng, -3, 3), y = test::uniform_in(rng, -3, 3);
    const double an = r_eval(row({x}), row({y}), SEKernelParams{th, eta, 1.0});
    CHECK(rel_err(an, r_quadrature_1d(x, y, th, eta)) < 1e-6);
  }
}

TEST_CASE("r_eval: isotropic finite-eta form factorizes over coordinates") {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const SEKernelParams p{test::log_uniform_in(rng, 0.3, 3), test::log_uniform_in(rng, 0.5, 10), 1.0};
    const Eigen::RowVectorXd x = test::normal_matrix(1, 3, rng), y = test::normal_matrix(1, 3, rng);
    double prod = 1.0;
    for (int d = 0; d < 3; ++d) prod *= r_eval(row({x[d]}), row({y[d]}), p);
    CHECK(rel_err(r_eval(x, y, p), prod) < 1e-12);
  }
}

TEST_CASE("r_eval: symmetry, stationarity and the large-eta limit") {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const Eigen::RowVectorXd x = test::normal_matrix(1, 2, rng, 3.0), y = test::normal_matrix(1, 2, rng, 3.0);
    const double th = test::log_uniform_in(rng, 0.2, 5);
    const SEKernelParams fin{th, 2.0, 1.0};
    CHECK(r_eval(x, y, fin) == r_eval(y, x, fin));
    const double ratio = r_eval(x, y, theta(th)) / r_eval(x, x, theta(th));
    CHECK(rel_err(ratio, se_eval(x, y, theta(th * std::numbers::sqrt2))) < 1e-12);
  }
  for (int t = 0; t < 50; ++t) {
    Eigen::RowVectorXd x = test::normal_matrix(1, 2, rng, 4.0), y = test::normal_matrix(1, 2, rng, 4.0);
    if (x.norm() > 10) x *= 10 / x.norm();
    if (y.norm() > 10) y *= 10 / y.norm();
    const double th = test::log_uniform_in(rng, 0.2, 5);
    CHECK(rel_err(r_eval(x, y, SEKernelParams{th, 1e6, 1.0}), r_eval(x, y, theta(th))) < 1e-4);
  }
}

TEST_CASE("gram: small cases match elementwise evaluation") {
  Matrix one(1, 2);
  one << 0.1, 0.2;
  CHECK(gram(one, theta(1), GramKind::K)(0, 0) == 1.0);

  Matrix pts(3, 1);
  pts << 0, 1, 3;
  const Matrix g = gram(pts, theta(1), GramKind::K);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(g(i, j) == se_eval(pts.row(i), pts.row(j), theta(1)));
  }

  Rng rng(4);
  const Matrix a = test::normal_matrix(6, 2, rng), b = test::normal_matrix(4, 2, rng);
  const SEKernelParams p{0.7, 3.0, 1.0};
  const Matrix ab = gram(a, b, p, GramKind::R);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(ab(i, j) == r_eval(a.row(i), b.row(j), p));
  }
  CHECK_THROWS_AS(gram(a, Matrix::Zero(2, 3), p, GramKind::K), InvalidInput);
}

TEST_CASE("gram: symmetric and PSD for both kinds") {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.index(3));
    const Matrix x = test::normal_matrix(30, dim, rng, 2.0);
    const double eta = t % 2 == 0 ? kLebesgueLimit : test::log_uniform_in(rng, 0.5, 10);
    const SEKernelParams p{test::log_uniform_in(rng, 0.1, 10), eta, 1.0};
    for (GramKind kind : {GramKind::K, GramKind::R}) {
      const Matrix g = gram(x, p, kind);
      CHECK((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      const Eigen::SelfAdjointEigenSolver<Matrix> es(g);
      const double top = es.eigenvalues().maxCoeff();
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * top);
      CHECK_NOTHROW(cholesky_with_jitter(g));
    }
  }
}

TEST_CASE("gram: OpenMP and serial reference agree bit for bit") {
  Rng rng(13);
  const Matrix a = test::normal_matrix(157, 3, rng), b = test::normal_matrix(61, 3, rng);
  for (const SEKernelParams& p : {theta(0.9), SEKernelParams{1.3, 2.0, 1.0}}) {
    for (GramKind kind : {GramKind::K, GramKind::R}) {
      const Matrix ref_sq = reference::gram(a, p, kind);
      const Matrix ref_ab = reference::gram(a, b, p, kind);
      for (int threads : {1, 2, 3, 8}) {
        set_thread_count(threads);
        CHECK(gram(a, p, kind) == ref_sq);
        CHECK(gram(a, b, p, kind) == ref_ab);
      }
    }
  }
  set_thread_count(0);
}

TEST_CASE("median_heuristic: conventions, scaling and permutation") {
  Matrix pts(3, 1);
  pts << 0, 1, 3;
  CHECK(median_heuristic(pts, MedianMode::Half) == 2.0);
  CHECK(median_heuristic(pts, MedianMode::NoHalf) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  Matrix four(4, 1);  // distances 1,2,3,1,2,1 -> median of {1,1,1,2,2,3} = 1.5
  four << 0, 1, 2, 3;
  CHECK(median_heuristic(four, MedianMode::Half) == 1.5);

  Rng rng(14);
  const Matrix x = test::normal_matrix(41, 2, rng);
  const double base = median_heuristic(x, MedianMode::NoHalf);
  CHECK(median_heuristic(2.0 * x, MedianMode::NoHalf) == 2.0 * base);
  CHECK(rel_err(median_heuristic(3.7 * x, MedianMode::NoHalf), 3.7 * base) < 1e-14);
  Matrix rev = x.colwise().reverse();
  CHECK(median_heuristic(rev, MedianMode::NoHalf) == base);

  CHECK_THROWS_AS(median_heuristic(Matrix::Ones(5, 2), MedianMode::Half), DegenerateData);
  CHECK_THROWS_AS(median_heuristic(Matrix::Ones(1, 2), MedianMode::Half), InvalidInput);
}
