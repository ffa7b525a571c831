#include "bke/learn.hpp"

#include "bke/random.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace bke {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isnan(v) ? kNegInf : v; }
}  // namespace

void LogGrid::validate() const {
  if (!(lo > 0) || !(hi > lo) || !std::isfinite(hi)) throw InvalidInput("grid needs 0 < lo < hi");
  if (count < 2) throw InvalidInput("grid needs at least two points");
}

std::vector<double> LogGrid::points() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

BKLResult maximize_on_log_grid(const std::function<double(double)>& objective, const LogGrid& grid,
                               const BKLOptions& options) {
  const std::vector<double> thetas = grid.points();
  BKLResult out;
  out.curve.reserve(thetas.size());
  for (double t : thetas) out.curve.push_back({t, sanitize(objective(t))});

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.curve.size(); ++i) {
    if (out.curve[i].loglik > out.curve[best].loglik) best = i;
  }
  if (!std::isfinite(out.curve[best].loglik)) {
    throw OptimizationFailed("objective is -inf or degenerate at every grid point");
  }
  for (std::size_t i = 1; i + 1 < out.curve.size(); ++i) {
    const double v = out.curve[i].loglik;
    if (v > out.curve[i - 1].loglik && v > out.curve[i + 1].loglik) {
      out.local_optima.push_back(out.curve[i].theta);
    }
  }
  out.theta_hat = out.curve[best].theta;
  out.best_loglik = out.curve[best].loglik;
  if (!options.refine) return out;

  // Golden-section maximization in log(theta) over the bracket around `best`.
  const std::size_t lo_i = best == 0 ? 0 : best - 1;
  const std::size_t hi_i = std::min(best + 1, out.curve.size() - 1);
  double a = std::log(out.curve[lo_i].theta);
  double b = std::log(out.curve[hi_i].theta);
  const double tol = std::log1p(options.rel_tol);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double u) { return sanitize(objective(std::exp(u))); };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double u = fc >= fd ? c : d;
  const double fu = std::max(fc, fd);
  if (fu > out.best_loglik) {
    out.best_loglik = fu;
    out.theta_hat = std::exp(u);
  }
  return out;
}

BKLResult bkl_optimize(const Eigen::Ref<const Matrix>& data, const Landmarks& landmarks, double tau2,
                       const LogGrid& grid, const BKLOptions& options) {
  grid.validate();
  if (!(tau2 > 0)) throw InvalidInput("tau2 must be positive");
  const Matrix work = data;
  auto objective = [&](double theta) {
    try {
      return log_pseudolik_fast(work, landmarks, {theta, options.eta, tau2}).total;
    } catch (const ConditioningError&) {
      return kNegInf;
    }
  };
  BKLResult out = maximize_on_log_grid(objective, grid, options);
  out.tau2 = tau2;
  return out;
}

void MHOptions::validate() const {
  if (chains < 1) throw InvalidInput("need at least one chain");
  if (warmup < 0 || iters <= warmup) throw InvalidInput("need iters > warmup >= 0");
  if (!(proposal_scale > 0)) throw InvalidInput("proposal scale must be positive");
  if (thin < 1) throw InvalidInput("thin must be >= 1");
  if (fixed_tau2 && !(*fixed_tau2 > 0)) throw InvalidInput("fixed tau2 must be positive");
}

ChainResult metropolis_chain(const std::function<double(const Vector&)>& log_density, Vector init,
                             int iters, double scale, Rng& rng) {
  const auto dim = init.size();
  ChainResult out;
  out.states.resize(iters, dim);
  Vector current = std::move(init);
  double current_lp = sanitize(log_density(current));
  Vector proposal(dim);
  for (int t = 0; t < iters; ++t) {
    for (Eigen::Index k = 0; k < dim; ++k) proposal[k] = current[k] + scale * rng.normal();
    const double u = rng.uniform();
    const double lp = sanitize(log_density(proposal));
    // Symmetric proposal: accept with probability min(1, p'/p).
    if (lp > kNegInf && std::log(u) < lp - current_lp) {
      current = proposal;
      current_lp = lp;
      ++out.accepted;
    }
    out.states.row(t) = current.transpose();
  }
  return out;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half < 2) continue;
    halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  if (halves.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double len = static_cast<double>(halves.front().size());
  double w = 0.0;
  std::vector<double> means;
  for (const auto& h : halves) {
    double m = 0.0;
    for (double v : h) m += v;
    m /= len;
    double s = 0.0;
    for (double v : h) s += (v - m) * (v - m);
    w += s / (len - 1.0);
    means.push_back(m);
  }
  w /= static_cast<double>(halves.size());
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(means.size());
  double b = 0.0;
  for (double m : means) b += (m - grand) * (m - grand);
  b *= len / static_cast<double>(means.size() - 1);
  if (!(w > 0)) return b > 0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double var_plus = (len - 1.0) / len * w + b / len;
  return std::sqrt(var_plus / w);
}

HyperPosterior mh_sample(const HyperLogLik& loglik, const MHOptions& options) {
  options.validate();
  const bool sample_tau2 = !options.fixed_tau2.has_value();
  const int dim = sample_tau2 ? 2 : 1;

  // Target in u = (log theta, log tau2): loglik + Gamma(1,1) log-priors
  // (-theta - tau2) + log-Jacobian of the exp transform (log theta + log tau2).
  auto log_target = [&](const Vector& u) {
    const double theta = std::exp(u[0]);
    const double tau2 = sample_tau2 ? std::exp(u[1]) : *options.fixed_tau2;
    if (!(theta > 0) || !std::isfinite(theta) || !(tau2 > 0) || !std::isfinite(tau2)) return kNegInf;
    double lp = sanitize(loglik(theta, tau2));
    if (lp == kNegInf) return kNegInf;
    lp += -theta + u[0];
    if (sample_tau2) lp += -tau2 + u[1];
    return lp;
  };

  std::vector<ChainResult> results(static_cast<std::size_t>(options.chains));
  std::vector<long> accepted_post(static_cast<std::size_t>(options.chains), 0);

#pragma omp parallel for schedule(static, 1)
  for (int c = 0; c < options.chains; ++c) {
    Rng rng = Rng::derived(options.seed, static_cast<std::uint64_t>(c));
    Vector init(dim);
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (int k = 0; k < dim; ++k) init[k] = -2.0 + 4.0 * rng.uniform();
      if (log_target(init) > kNegInf) break;
    }
    // Warmup and sampling share one chain; acceptance is counted after warmup.
    ChainResult warm = metropolis_chain(log_target, init, options.warmup, options.proposal_scale, rng);
    Vector start = options.warmup > 0 ? Vector(warm.states.row(options.warmup - 1).transpose()) : init;
    ChainResult post = metropolis_chain(log_target, start, options.iters - options.warmup,
                                        options.proposal_scale, rng);
    accepted_post[static_cast<std::size_t>(c)] = post.accepted;
    results[static_cast<std::size_t>(c)] = std::move(post);
  }

  HyperPosterior out;
  out.chains = options.chains;
  out.warmup_discarded = options.warmup;
  out.eta = options.eta;
  std::vector<std::vector<double>> theta_chains;
  std::vector<std::vector<double>> tau2_chains;
  for (int c = 0; c < options.chains; ++c) {
    const Matrix& s = results[static_cast<std::size_t>(c)].states;
    std::vector<double> th;
    std::vector<double> t2;
    for (Eigen::Index t = 0; t < s.rows(); t += options.thin) {
      const HyperDraw d{std::exp(s(t, 0)), sample_tau2 ? std::exp(s(t, 1)) : *options.fixed_tau2};
      out.draws.push_back(d);
      th.push_back(d.theta);
      t2.push_back(d.tau2);
    }
    theta_chains.push_back(std::move(th));
    tau2_chains.push_back(std::move(t2));
    out.accepted += accepted_post[static_cast<std::size_t>(c)];
  }
  out.proposed = static_cast<long>(options.chains) * (options.iters - options.warmup);
  out.acceptance_rate = static_cast<double>(out.accepted) / static_cast<double>(out.proposed);
  out.rhat_theta = split_rhat(theta_chains);
  out.rhat_tau2 = sample_tau2 ? split_rhat(tau2_chains) : std::numeric_limits<double>::quiet_NaN();
  if (out.rhat_theta > 1.1 || (sample_tau2 && out.rhat_tau2 > 1.1)) {
    std::cerr << "warning: split-Rhat above 1.1 (theta " << out.rhat_theta << ", tau2 " << out.rhat_tau2
              << "); chains may not have mixed\n";
  }
  return out;
}

HyperPosterior mh_sample(const Eigen::Ref<const Matrix>& data, const Landmarks& landmarks,
                         const MHOptions& options) {
  const Matrix work = data;
  auto loglik = [&](double theta, double tau2) {
    try {
      return log_pseudolik_fast(work, landmarks, {theta, options.eta, tau2}).total;
    } catch (const ConditioningError&) {
      return kNegInf;
    }
  };
  return mh_sample(loglik, options);
}

}  // namespace bke
