#include "bke/testing.hpp"

#include "bke/embedding.hpp"
#include "bke/kernels.hpp"
#include "bke/linalg.hpp"
#include "bke/parallel.hpp"
#include "bke/random.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace bke {

double mmd2(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
            const SEKernelParams& params, MMDVariant variant) {
  detail::check_same_dim(x.cols(), y.cols());
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(y.rows());
  const Eigen::Index min_rows = variant == MMDVariant::Unbiased ? 2 : 1;
  if (x.rows() < min_rows || y.rows() < min_rows) throw InvalidInput("too few samples for MMD");

  const Matrix kxx = gram(x, params, GramKind::K);
  const Matrix kyy = gram(y, params, GramKind::K);
  const Matrix kxy = gram(x, y, params, GramKind::K);
  if (variant == MMDVariant::Biased) {
    return kxx.sum() / (n * n) + kyy.sum() / (m * m) - 2.0 * kxy.sum() / (n * m);
  }
  return (kxx.sum() - kxx.trace()) / (n * (n - 1.0)) + (kyy.sum() - kyy.trace()) / (m * (m - 1.0)) -
         2.0 * kxy.sum() / (n * m);
}

Matrix double_centre(const Matrix& k) {
  const Vector row_mean = k.rowwise().mean();
  const Eigen::RowVectorXd col_mean = k.colwise().mean();
  const double grand = k.mean();
  Matrix c = k;
  c.colwise() -= row_mean;
  c.rowwise() -= col_mean;
  c.array() += grand;
  return c;
}

double hsic(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
            const SEKernelParams& params_x, const SEKernelParams& params_y) {
  if (x.rows() != y.rows()) throw InvalidInput("HSIC needs paired samples of equal size");
  if (x.rows() < 4) throw InvalidInput("HSIC needs at least four pairs");
  const double n = static_cast<double>(x.rows());
  const Matrix kc = double_centre(gram(x, params_x, GramKind::K));
  const Matrix l = gram(y, params_y, GramKind::K);
  return kc.cwiseProduct(l).sum() / (n * n);
}

void PermutationConfig::validate() const {
  if (n_permutations < 100) throw InvalidInput("need at least 100 permutations");
  if (!(alpha > 0 && alpha < 1)) throw InvalidInput("alpha must lie in (0, 1)");
}

double permutation_p_value(double observed, const std::vector<double>& permuted) {
  const auto exceed = std::count_if(permuted.begin(), permuted.end(), [&](double s) { return s >= observed; });
  return (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(permuted.size()));
}

double mmd2_from_gram(const Matrix& g, const std::vector<char>& in_x, MMDVariant variant) {
  const Eigen::Index total = g.rows();
  double sxx = 0.0, syy = 0.0, sxy = 0.0, dx = 0.0, dy = 0.0;
  Eigen::Index nx = 0;
  for (Eigen::Index i = 0; i < total; ++i) {
    double to_x = 0.0;
    double to_y = 0.0;
    for (Eigen::Index j = 0; j < total; ++j) {
      if (in_x[static_cast<std::size_t>(j)]) {
        to_x += g(j, i);
      } else {
        to_y += g(j, i);
      }
    }
    if (in_x[static_cast<std::size_t>(i)]) {
      sxx += to_x;
      sxy += to_y;
      dx += g(i, i);
      ++nx;
    } else {
      syy += to_y;
      dy += g(i, i);
    }
  }
  const double n = static_cast<double>(nx);
  const double m = static_cast<double>(total - nx);
  if (variant == MMDVariant::Biased) return sxx / (n * n) + syy / (m * m) - 2.0 * sxy / (n * m);
  return (sxx - dx) / (n * (n - 1.0)) + (syy - dy) / (m * (m - 1.0)) - 2.0 * sxy / (n * m);
}

namespace {
std::vector<char> split_mask(Eigen::Index total, Eigen::Index nx, std::uint64_t seed, int b) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(total));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(b));
  rng.shuffle(perm);
  std::vector<char> in_x(static_cast<std::size_t>(total), 0);
  for (Eigen::Index k = 0; k < nx; ++k) in_x[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = 1;
  return in_x;
}

std::vector<Eigen::Index> row_permutation(Eigen::Index n, std::uint64_t seed, int b) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(b));
  rng.shuffle(perm);
  return perm;
}

double hsic_permuted(const Matrix& kc, const Matrix& l, const std::vector<Eigen::Index>& perm) {
  const Eigen::Index n = kc.rows();
  double s = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index pj = perm[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < n; ++i) s += kc(i, j) * l(perm[static_cast<std::size_t>(i)], pj);
  }
  const double nn = static_cast<double>(n);
  return s / (nn * nn);
}
}  // namespace

std::vector<double> mmd_permutation_statistics(const Matrix& pooled_gram, Eigen::Index nx,
                                               MMDVariant variant, int n_permutations,
                                               std::uint64_t seed) {
  std::vector<double> out(static_cast<std::size_t>(n_permutations));
#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count())
  for (int b = 0; b < n_permutations; ++b) {
    out[static_cast<std::size_t>(b)] =
        mmd2_from_gram(pooled_gram, split_mask(pooled_gram.rows(), nx, seed, b), variant);
  }
  return out;
}

std::vector<double> hsic_permutation_statistics(const Matrix& centred_k, const Matrix& l,
                                                int n_permutations, std::uint64_t seed) {
  std::vector<double> out(static_cast<std::size_t>(n_permutations));
#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count())
  for (int b = 0; b < n_permutations; ++b) {
    out[static_cast<std::size_t>(b)] = hsic_permuted(centred_k, l, row_permutation(l.rows(), seed, b));
  }
  return out;
}

TestResult mmd_permutation_test(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                                const SEKernelParams& params, MMDVariant variant,
                                const PermutationConfig& cfg) {
  cfg.validate();
  detail::check_same_dim(x.cols(), y.cols());
  const Eigen::Index min_rows = variant == MMDVariant::Unbiased ? 2 : 1;
  if (x.rows() < min_rows || y.rows() < min_rows) throw InvalidInput("too few samples for MMD");
  Matrix pooled(x.rows() + y.rows(), x.cols());
  pooled << x, y;
  const Matrix g = gram(pooled, params, GramKind::K);
  std::vector<char> observed_split(static_cast<std::size_t>(pooled.rows()), 0);
  std::fill_n(observed_split.begin(), x.rows(), 1);

  TestResult out;
  out.statistic = mmd2_from_gram(g, observed_split, variant);
  const auto null = mmd_permutation_statistics(g, x.rows(), variant, cfg.n_permutations, cfg.seed);
  out.p_value = permutation_p_value(out.statistic, null);
  out.n_permutations = cfg.n_permutations;
  out.alpha = cfg.alpha;
  out.reject = out.p_value <= cfg.alpha;
  out.kernel = params;
  return out;
}

TestResult hsic_permutation_test(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                                 const SEKernelParams& params_x, const SEKernelParams& params_y,
                                 const PermutationConfig& cfg) {
  cfg.validate();
  if (x.rows() != y.rows()) throw InvalidInput("HSIC needs paired samples of equal size");
  if (x.rows() < 4) throw InvalidInput("HSIC needs at least four pairs");
  const Matrix kc = double_centre(gram(x, params_x, GramKind::K));
  const Matrix l = gram(y, params_y, GramKind::K);
  std::vector<Eigen::Index> identity(static_cast<std::size_t>(x.rows()));
  std::iota(identity.begin(), identity.end(), Eigen::Index{0});

  TestResult out;
  out.statistic = hsic_permuted(kc, l, identity);
  const auto null = hsic_permutation_statistics(kc, l, cfg.n_permutations, cfg.seed);
  out.p_value = permutation_p_value(out.statistic, null);
  out.n_permutations = cfg.n_permutations;
  out.alpha = cfg.alpha;
  out.reject = out.p_value <= cfg.alpha;
  out.kernel = params_x;
  out.kernel_y = params_y;
  return out;
}

std::vector<bool> WitnessBand::excludes_zero() const {
  std::vector<bool> out(static_cast<std::size_t>(mean.size()));
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    out[static_cast<std::size_t>(i)] = lower[i] > 0.0 || upper[i] < 0.0;
  }
  return out;
}

double WitnessBand::excluded_fraction() const {
  const auto ex = excludes_zero();
  if (ex.empty()) return 0.0;
  return static_cast<double>(std::count(ex.begin(), ex.end(), true)) / static_cast<double>(ex.size());
}

namespace {
struct FunctionSampler {
  Vector mean;
  Matrix chol_lower;
};

FunctionSampler make_sampler(const Eigen::Ref<const Matrix>& data, const Eigen::Ref<const Matrix>& grid,
                             const SEKernelParams& params) {
  const PosteriorEmbedding post = posterior(EmpiricalEmbedding{Matrix(data), params}, grid);
  const JitteredCholesky chol = cholesky_with_jitter(post.covariance);
  return {post.mean, chol.llt.matrixL()};
}

// Type-7 quantile of sorted values.
double quantile_sorted(const std::vector<double>& v, double q) {
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}
}  // namespace

WitnessBand witness_band(const Eigen::Ref<const Matrix>& data_p, const Eigen::Ref<const Matrix>& data_q,
                         const Eigen::Ref<const Matrix>& grid, const HyperSource& hyper, double level,
                         int n_draws, std::uint64_t seed) {
  if (!(level > 0 && level < 1)) throw InvalidInput("band level must lie in (0, 1)");
  if (n_draws < 2) throw InvalidInput("need at least two function draws");
  detail::check_same_dim(data_p.cols(), grid.cols());
  detail::check_same_dim(data_q.cols(), grid.cols());

  // Hyperparameters per draw, chosen serially from the master stream.
  std::vector<SEKernelParams> choice(static_cast<std::size_t>(n_draws));
  if (const auto* fixed = std::get_if<SEKernelParams>(&hyper)) {
    std::fill(choice.begin(), choice.end(), *fixed);
  } else {
    const auto& post = std::get<HyperPosterior>(hyper);
    if (post.draws.empty()) throw InvalidInput("hyperparameter posterior has no draws");
    Rng rng(seed);
    for (auto& c : choice) {
      const HyperDraw& d = post.draws[rng.index(post.draws.size())];
      c = SEKernelParams{d.theta, post.eta, d.tau2};
    }
  }

  // One posterior pair per distinct hyperparameter value.
  std::map<std::pair<double, double>, std::size_t> slot_of;
  std::vector<SEKernelParams> distinct;
  std::vector<std::size_t> slot(choice.size());
  for (std::size_t k = 0; k < choice.size(); ++k) {
    const auto key = std::make_pair(choice[k].theta, choice[k].tau2);
    auto [it, inserted] = slot_of.try_emplace(key, distinct.size());
    if (inserted) distinct.push_back(choice[k]);
    slot[k] = it->second;
  }
  std::vector<FunctionSampler> samp_p(distinct.size());
  std::vector<FunctionSampler> samp_q(distinct.size());
  for (std::size_t s = 0; s < distinct.size(); ++s) {
    samp_p[s] = make_sampler(data_p, grid, distinct[s]);
    samp_q[s] = make_sampler(data_q, grid, distinct[s]);
  }

  const Eigen::Index p = grid.rows();
  Matrix draws(p, n_draws);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int k = 0; k < n_draws; ++k) {
    Rng rng = Rng::derived(seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(k));
    Vector z1(p), z2(p);
    for (Eigen::Index i = 0; i < p; ++i) z1[i] = rng.normal();
    for (Eigen::Index i = 0; i < p; ++i) z2[i] = rng.normal();
    const auto& sp = samp_p[slot[static_cast<std::size_t>(k)]];
    const auto& sq = samp_q[slot[static_cast<std::size_t>(k)]];
    draws.col(k) = (sp.mean + sp.chol_lower * z1) - (sq.mean + sq.chol_lower * z2);
  }

  WitnessBand band;
  band.grid = grid;
  band.level = level;
  band.n_draws = n_draws;
  band.mean = draws.rowwise().mean();
  band.lower.resize(p);
  band.upper.resize(p);
  std::vector<double> row(static_cast<std::size_t>(n_draws));
  for (Eigen::Index i = 0; i < p; ++i) {
    for (int k = 0; k < n_draws; ++k) row[static_cast<std::size_t>(k)] = draws(i, k);
    std::sort(row.begin(), row.end());
    band.lower[i] = quantile_sorted(row, 0.5 * (1.0 - level));
    band.upper[i] = quantile_sorted(row, 0.5 * (1.0 + level));
  }
  return band;
}

}  // namespace bke
