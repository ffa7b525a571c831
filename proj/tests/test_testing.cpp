#include "bke/kernels.hpp"
#include "bke/parallel.hpp"
#include "bke/reference.hpp"
#include "bke/synthdata.hpp"
#include "bke/testing.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace bke;

namespace {
SEKernelParams kp(double theta) { return SEKernelParams{theta, kLebesgueLimit, 1.0}; }

Matrix permute_rows(const Matrix& m, const std::vector<Eigen::Index>& p) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(p[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<Eigen::Index> random_perm(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Eigen::Index{0});
  rng.shuffle(p);
  return p;
}

Matrix line_grid(int count, double lo, double hi) {
  Matrix g(count, 1);
  for (int i = 0; i < count; ++i) g(i, 0) = lo + (hi - lo) * i / (count - 1);
  return g;
}
}  // namespace

TEST_CASE("mmd2: worked examples") {
  Rng rng(1);
  const Matrix x = test::normal_matrix(12, 2, rng);
  CHECK(std::abs(mmd2(x, x, kp(0.7), MMDVariant::Biased)) <= 1e-12);

  for (double a : {0.3, 1.0, 2.5}) {
    Matrix x0(1, 1), y0(1, 1);
    x0 << 0.0;
    y0 << a;
    CHECK(mmd2(x0, y0, kp(1.3), MMDVariant::Biased) ==
          doctest::Approx(2 * (1 - std::exp(-a * a / (2 * 1.69)))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(mmd2(x, Matrix::Zero(3, 1), kp(1), MMDVariant::Biased), InvalidInput);
  CHECK_THROWS_AS(mmd2(x.topRows(1), x, kp(1), MMDVariant::Unbiased), InvalidInput);
}

TEST_CASE("mmd2: biased value equals the double-sum expansion") {
  Rng rng(2);
  const Matrix x = test::normal_matrix(30, 2, rng), y = test::normal_matrix(30, 2, rng, 1.5);
  const auto p = kp(0.9);
  double sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      sxx += se_eval(x.row(i), x.row(j), p);
      syy += se_eval(y.row(i), y.row(j), p);
      sxy += se_eval(x.row(i), y.row(j), p);
    }
  }
  const double expect = (sxx + syy - 2 * sxy) / 900.0;
  CHECK(std::abs(mmd2(x, y, p, MMDVariant::Biased) - expect) <= 1e-12);
}

TEST_CASE("mmd2: biased is nonnegative and unbiased obeys the sanity bound") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(20));
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.index(20));
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.index(3));
    const Matrix x = test::normal_matrix(n, dim, rng), y = test::normal_matrix(m, dim, rng);
    const auto p = kp(test::log_uniform_in(rng, 0.1, 10));
    CHECK(mmd2(x, y, p, MMDVariant::Biased) >= 0.0);
    CHECK(mmd2(x, y, p, MMDVariant::Unbiased) >= -4.0 / static_cast<double>(std::min(n, m)));
  }
}

TEST_CASE("mmd2 and hsic are invariant under row permutation") {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Matrix x = test::normal_matrix(25, 2, rng), y = test::normal_matrix(20, 2, rng);
    const auto px = random_perm(25, rng), py = random_perm(20, rng);
    for (auto v : {MMDVariant::Biased, MMDVariant::Unbiased}) {
      const double a = mmd2(x, y, kp(0.8), v);
      const double b = mmd2(permute_rows(x, px), permute_rows(y, py), kp(0.8), v);
      CHECK(std::abs(a - b) <= 1e-12);
    }
    const Matrix u = test::normal_matrix(25, 1, rng);
    const double h = hsic(x, u, kp(0.8), kp(1.2));
    // Pairs move together.
    const double hp = hsic(permute_rows(x, px), permute_rows(u, px), kp(0.8), kp(1.2));
    CHECK(std::abs(h - hp) <= 1e-12);
  }
}

TEST_CASE("hsic: constant y, self-HSIC and brute-force expansion") {
  Rng rng(5);
  const Matrix x = test::normal_matrix(15, 2, rng);
  CHECK(std::abs(hsic(x, Matrix::Constant(15, 1, 3.0), kp(1), kp(1))) <= 1e-12);

  const Matrix hkh = double_centre(gram(x, kp(0.9), GramKind::K));
  const double self = hsic(x, x, kp(0.9), kp(0.9));
  CHECK(self == doctest::Approx(hkh.squaredNorm() / 225.0).epsilon(1e-12));
  CHECK(self >= 0.0);

  // V-statistic form: (1/n^2) sum k l + (1/n^4) sum k sum l - (2/n^3) sum_ijq k_ij l_iq.
  for (int t = 0; t < 5; ++t) {
    const Matrix a = test::normal_matrix(6, 2, rng), b = test::normal_matrix(6, 1, rng);
    const auto pa = kp(0.7), pb = kp(1.4);
    double t1 = 0, sk = 0, sl = 0, t3 = 0;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        const double k = se_eval(a.row(i), a.row(j), pa);
        const double l = se_eval(b.row(i), b.row(j), pb);
        t1 += k * l;
        sk += k;
        sl += l;
        for (int q = 0; q < 6; ++q) t3 += k * se_eval(b.row(i), b.row(q), pb);
      }
    }
    const double expect = t1 / 36 + sk * sl / 1296 - 2 * t3 / 216;
    CHECK(std::abs(hsic(a, b, pa, pb) - expect) <= 1e-10);
  }
  CHECK_THROWS_AS(hsic(x, x.topRows(10), kp(1), kp(1)), InvalidInput);
  CHECK_THROWS_AS(hsic(x.topRows(3), x.topRows(3), kp(1), kp(1)), InvalidInput);
}

TEST_CASE("permutation_p_value: add-one formula with ties counted") {
  CHECK(permutation_p_value(1.0, {0.5, 1.0, 2.0, 0.1}) == doctest::Approx(3.0 / 5.0));
  CHECK(permutation_p_value(5.0, std::vector<double>(99, 1.0)) == doctest::Approx(0.01));
  CHECK(permutation_p_value(0.0, std::vector<double>(99, 0.0)) == 1.0);
}

TEST_CASE("mmd_permutation_test: identical samples, determinism and result fields") {
  Rng rng(6);
  const Matrix x = test::normal_matrix(40, 2, rng);
  const PermutationConfig cfg{300, 0.05, 11};
  const auto r = mmd_permutation_test(x, x, kp(1), MMDVariant::Biased, cfg);
  CHECK(std::abs(r.statistic) <= 1e-12);
  CHECK(r.p_value >= 0.5);
  CHECK(r.p_value <= 1.0);
  CHECK_FALSE(r.reject);
  CHECK(r.n_permutations == 300);

  const Matrix y = test::normal_matrix(35, 2, rng, 1.3);
  const auto a = mmd_permutation_test(x, y, kp(1), MMDVariant::Unbiased, cfg);
  const auto b = mmd_permutation_test(x, y, kp(1), MMDVariant::Unbiased, cfg);
  CHECK(a.statistic == b.statistic);
  CHECK(a.p_value == b.p_value);
  CHECK(a.reject == (a.p_value <= a.alpha));
  CHECK(std::abs(a.statistic - mmd2(x, y, kp(1), MMDVariant::Unbiased)) <= 1e-12);
  CHECK_FALSE(a.kernel_y.has_value());

  // Clearly shifted samples are rejected.
  Matrix shifted = y;
  shifted.array() += 1.5;
  const auto c = mmd_permutation_test(x, shifted, kp(1), MMDVariant::Biased, cfg);
  CHECK(c.reject);
  CHECK(c.p_value == doctest::Approx(1.0 / 301));

  CHECK_THROWS_AS(mmd_permutation_test(x, y, kp(1), MMDVariant::Biased, {99, 0.05, 0}), InvalidInput);
  CHECK_THROWS_AS(mmd_permutation_test(x, y, kp(1), MMDVariant::Biased, {200, 1.5, 0}), InvalidInput);
}

TEST_CASE("hsic_permutation_test: dependence is detected, fields are set") {
  Rng rng(7);
  const Matrix x = test::normal_matrix(80, 1, rng);
  Matrix y = x.array().square().matrix();
  y += 0.1 * test::normal_matrix(80, 1, rng);
  const auto r = hsic_permutation_test(x, y, kp(1), kp(0.8), {300, 0.05, 2});
  CHECK(r.reject);
  REQUIRE(r.kernel_y.has_value());
  CHECK(r.kernel_y->theta == 0.8);
  CHECK(std::abs(r.statistic - hsic(x, y, kp(1), kp(0.8))) <= 1e-12);
  const auto again = hsic_permutation_test(x, y, kp(1), kp(0.8), {300, 0.05, 2});
  CHECK(again.p_value == r.p_value);
}

TEST_CASE("permutation tests hold their level under the null") {
  const PermutationConfig base{500, 0.05, 0};
  int mmd_rejects = 0, hsic_rejects = 0;
  for (int rep = 0; rep < 40; ++rep) {
    Rng rng(1000 + static_cast<std::uint64_t>(rep));
    const Matrix x = test::normal_matrix(100, 2, rng), y = test::normal_matrix(100, 2, rng);
    PermutationConfig cfg = base;
    cfg.seed = static_cast<std::uint64_t>(rep);
    mmd_rejects += mmd_permutation_test(x, y, kp(1), MMDVariant::Biased, cfg).reject ? 1 : 0;
    const Matrix u = test::normal_matrix(100, 1, rng);
    hsic_rejects += hsic_permutation_test(x, u, kp(1), kp(1), cfg).reject ? 1 : 0;
  }
  CHECK(mmd_rejects <= 4);
  CHECK(hsic_rejects <= 4);
}

TEST_CASE("null p-values are super-uniform at 0.05") {
  int small = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Rng rng(5000 + static_cast<std::uint64_t>(rep));
    const Matrix x = test::normal_matrix(30, 1, rng), y = test::normal_matrix(30, 1, rng);
    const auto r = mmd_permutation_test(x, y, kp(0.8), MMDVariant::Unbiased,
                                        {200, 0.05, static_cast<std::uint64_t>(rep)});
    small += r.p_value <= 0.05 ? 1 : 0;
  }
  CHECK(small <= 20);
}

TEST_CASE("permutation statistics match the serial reference bit for bit") {
  Rng rng(8);
  const Matrix pooled = test::normal_matrix(70, 2, rng);
  const Matrix g = gram(pooled, kp(0.9), GramKind::K);
  const Matrix kc = double_centre(g);
  const Matrix l = gram(test::normal_matrix(70, 1, rng), kp(1.1), GramKind::K);
  const auto ref_b = reference::mmd_permutation_statistics(g, 30, MMDVariant::Biased, 150, 3);
  const auto ref_u = reference::mmd_permutation_statistics(g, 30, MMDVariant::Unbiased, 150, 3);
  const auto ref_h = reference::hsic_permutation_statistics(kc, l, 150, 3);
  for (int threads : {1, 2, 3, 8}) {
    CAPTURE(threads);
    set_thread_count(threads);
    CHECK(mmd_permutation_statistics(g, 30, MMDVariant::Biased, 150, 3) == ref_b);
    CHECK(mmd_permutation_statistics(g, 30, MMDVariant::Unbiased, 150, 3) == ref_u);
    CHECK(hsic_permutation_statistics(kc, l, 150, 3) == ref_h);
  }
  set_thread_count(0);

  // The Gram-based split statistic agrees with the direct one.
  std::vector<char> in_x(70, 0);
  for (int i = 0; i < 30; ++i) in_x[static_cast<std::size_t>(i)] = 1;
  for (auto v : {MMDVariant::Biased, MMDVariant::Unbiased}) {
    CHECK(std::abs(mmd2_from_gram(g, in_x, v) - mmd2(pooled.topRows(30), pooled.bottomRows(40), kp(0.9), v)) <= 1e-12);
  }
}

TEST_CASE("witness_band: symmetric null, ordering and determinism") {
  Rng rng(9);
  const Matrix x = test::normal_matrix(60, 1, rng);
  const Matrix grid = line_grid(101, -4, 4);
  const auto band = witness_band(x, x, grid, kp(0.8), 0.8, 800, 4);
  CHECK(band.n_draws == 800);
  CHECK(band.level == 0.8);
  int near = 0;
  for (Eigen::Index i = 0; i < 101; ++i) {
    CHECK(band.lower[i] <= band.mean[i]);
    CHECK(band.mean[i] <= band.upper[i]);
    const double half = 0.5 * (band.upper[i] - band.lower[i]);
    near += std::abs(band.mean[i]) <= 3 * half / 1.28 ? 1 : 0;
  }
  CHECK(near >= 96);

  const auto again = witness_band(x, x, grid, kp(0.8), 0.8, 800, 4);
  CHECK(again.mean == band.mean);
  CHECK(again.lower == band.lower);
  CHECK(again.upper == band.upper);

  set_thread_count(3);
  const auto threaded = witness_band(x, x, grid, kp(0.8), 0.8, 800, 4);
  set_thread_count(0);
  CHECK(threaded.upper == band.upper);

  CHECK_THROWS_AS(witness_band(x, x, grid, kp(0.8), 1.0, 800, 4), InvalidInput);
  CHECK_THROWS_AS(witness_band(x, x, grid, kp(0.8), 0.8, 1, 4), InvalidInput);
  CHECK_THROWS_AS(witness_band(x, x, grid, HyperPosterior{}, 0.8, 100, 4), InvalidInput);
  CHECK_THROWS_AS(witness_band(x, x, Matrix::Zero(5, 2), kp(0.8), 0.8, 100, 4), InvalidInput);
}

TEST_CASE("witness_band: posterior hyperparameters are sampled from the draws") {
  Rng rng(10);
  const Matrix x = test::normal_matrix(40, 1, rng), y = test::normal_matrix(40, 1, rng);
  const Matrix grid = line_grid(21, -3, 3);
  HyperPosterior single;
  single.draws = {{0.7, 1.0}};
  const auto a = witness_band(x, y, grid, single, 0.8, 200, 1);
  const auto b = witness_band(x, y, grid, kp(0.7), 0.8, 200, 1);
  CHECK(a.upper == b.upper);
  HyperPosterior spread;
  spread.draws = {{0.3, 1.0}, {0.7, 2.0}, {1.5, 0.5}};
  const auto c = witness_band(x, y, grid, spread, 0.8, 300, 1);
  CHECK(c.mean.allFinite());
  CHECK(c.excluded_fraction() >= 0.0);
}

TEST_CASE("witness_band: width shrinks as the samples grow") {
  const Matrix grid = line_grid(101, -4, 4);
  int narrower = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [p50, q50] = gen_normal_laplace(50, seed);
    const auto [p400, q400] = gen_normal_laplace(400, seed + 100);
    const auto small = witness_band(p50, q50, grid, kp(0.8), 0.8, 400, seed);
    const auto large = witness_band(p400, q400, grid, kp(0.8), 0.8, 400, seed);
    std::vector<double> ratio(101);
    for (Eigen::Index i = 0; i < 101; ++i) {
      ratio[static_cast<std::size_t>(i)] = (large.upper[i] - large.lower[i]) / (small.upper[i] - small.lower[i]);
    }
    std::nth_element(ratio.begin(), ratio.begin() + 50, ratio.end());
    narrower += ratio[50] <= 1.0 ? 1 : 0;
  }
  CHECK(narrower == 10);
}
