// bke: command-line front end for learning, embedding and kernel tests.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include "bke/csv.hpp"
#include "bke/embedding.hpp"
#include "bke/kernels.hpp"
#include "bke/learn.hpp"
#include "bke/pseudolik.hpp"
#include "bke/synthdata.hpp"
#include "bke/testing.hpp"
#include "bke/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <cmath>
#include <string>

using json = nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

// ---- small helpers ----

bke::Matrix load(const std::string& path) { return bke::read_csv(path).values; }

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw bke::InvalidInput(std::string("cannot parse ") + what + ": '" + s + "'");
  }
  return v;
}

double parse_eta(const std::string& s) {
  if (s == "inf" || s == "lebesgue") return bke::kLebesgueLimit;
  return parse_double(s, "eta");
}

bke::LogGrid parse_log_grid(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw bke::InvalidInput("grid must be lo:hi:count, got '" + spec + "'");
  }
  bke::LogGrid g;
  g.lo = parse_double(spec.substr(0, a), "grid lo");
  g.hi = parse_double(spec.substr(a + 1, b - a - 1), "grid hi");
  const double count = parse_double(spec.substr(b + 1), "grid count");
  if (count != std::floor(count) || count > 1e6) throw bke::InvalidInput("grid count must be an integer");
  g.count = static_cast<int>(count);
  g.validate();
  return g;
}

bke::MedianMode parse_median_mode(const std::string& s) {
  if (s == "no-half") return bke::MedianMode::NoHalf;
  if (s == "half") return bke::MedianMode::Half;
  throw bke::InvalidInput("median heuristic must be no-half or half");
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    bke::write_file_atomic(path, text);
  }
}

void emit_json(const std::string& path, const json& j) { emit(path, j.dump(2) + "\n"); }

std::vector<std::string> coordinate_names(Eigen::Index dim) {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < dim; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

void require_same_dim(const bke::Matrix& a, const bke::Matrix& b, const char* what) {
  if (a.cols() != b.cols()) {
    throw bke::DataError(std::string(what) + ": inputs have " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.cols()) + " columns");
  }
}

json kernel_json(const bke::SEKernelParams& p) {
  json j{{"theta", p.theta}, {"tau2", p.tau2}};
  j["eta"] = p.lebesgue() ? json("inf") : json(p.eta);
  return j;
}

json test_result_json(const bke::TestResult& r) {
  json j{{"statistic", r.statistic},
         {"p_value", r.p_value},
         {"n_permutations", r.n_permutations},
         {"alpha", r.alpha},
         {"reject", r.reject},
         {"kernel", kernel_json(r.kernel)}};
  if (r.kernel_y) j["kernel_y"] = kernel_json(*r.kernel_y);
  return j;
}

// Every option of the subcommand with its effective value, so that a run
// can be repeated from its output alone.
// Numbers are echoed as JSON numbers, everything else as the string given.
json typed(const std::string& s) {
  long long i = 0;
  const char* end = s.data() + s.size();
  if (auto [p, ec] = std::from_chars(s.data(), end, i); ec == std::errc() && p == end) return i;
  double d = 0;
  if (auto [p, ec] = std::from_chars(s.data(), end, d); ec == std::errc() && p == end && std::isfinite(d)) return d;
  return s;
}

json echo_config(const CLI::App* sub, const std::string& name) {
  json cfg{{"subcommand", name}};
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string key = opt->get_single_name();
    if (key == "help") continue;
    if (opt->get_items_expected_max() == 0) {
      cfg[key] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) {
        cfg[key] = typed(res.front());
      } else {
        json arr = json::array();
        for (const auto& r : res) arr.push_back(typed(r));
        cfg[key] = arr;
      }
    } else if (!opt->get_default_str().empty()) {
      cfg[key] = typed(opt->get_default_str());
    } else {
      cfg[key] = nullptr;
    }
  }
  return cfg;
}

json envelope(const CLI::App* sub, const std::string& name) {
  return json{{"version", bke::kVersion}, {"config", echo_config(sub, name)}};
}

// ---- subcommands ----

struct LearnArgs {
  std::string data, grid = "0.05:50:60", eta = "inf", json_out, csv_out;
  double tau2 = 1.0;
  std::optional<long> m;
  std::uint64_t seed = 0;
  bool no_refine = false;
};

int run_learn(const LearnArgs& a, const CLI::App* sub) {
  const bke::Matrix data = load(a.data);
  const bke::LogGrid grid = parse_log_grid(a.grid);
  const Eigen::Index m = a.m ? *a.m : bke::default_landmark_count(data.rows(), data.cols());
  const auto split = bke::choose_landmarks(data, m, a.seed);
  bke::BKLOptions opts;
  opts.refine = !a.no_refine;
  opts.eta = parse_eta(a.eta);
  const bke::BKLResult res = bke::bkl_optimize(split.remaining, split.landmarks, a.tau2, grid, opts);

  json out = envelope(sub, "learn");
  out["theta_hat"] = res.theta_hat;
  out["tau2"] = res.tau2;
  out["best_loglik"] = res.best_loglik;
  out["local_optima"] = res.local_optima;
  out["m"] = m;
  out["n_working"] = split.remaining.rows();
  json curve = json::array();
  for (const auto& c : res.curve) curve.push_back({{"theta", c.theta}, {"loglik", c.loglik}});
  out["curve"] = curve;
  if (!a.csv_out.empty()) {
    // -inf rows are written as such; read_csv rejects them, which is intended.
    std::string text = "theta,loglik\n";
    for (const auto& c : res.curve) {
      char buf[64];
      auto r1 = std::to_chars(buf, buf + sizeof buf, c.theta);
      text.append(buf, r1.ptr);
      text += ',';
      auto r2 = std::to_chars(buf, buf + sizeof buf, c.loglik);
      text.append(buf, r2.ptr);
      text += '\n';
    }
    emit(a.csv_out, text);
  }
  emit_json(a.json_out, out);
  return kOk;
}

struct SampleArgs {
  std::string data, eta = "inf", json_out, csv_out;
  int iters = 400, warmup = 200, chains = 4, thin = 1;
  double proposal_scale = 0.15;
  std::optional<double> fixed_tau2;
  std::optional<long> m;
  std::uint64_t seed = 0;
};

int run_sample(const SampleArgs& a, const CLI::App* sub) {
  const bke::Matrix data = load(a.data);
  const Eigen::Index m = a.m ? *a.m : bke::default_landmark_count(data.rows(), data.cols());
  const auto split = bke::choose_landmarks(data, m, a.seed);
  bke::MHOptions opts;
  opts.iters = a.iters;
  opts.warmup = a.warmup;
  opts.chains = a.chains;
  opts.seed = a.seed;
  opts.proposal_scale = a.proposal_scale;
  opts.thin = a.thin;
  opts.fixed_tau2 = a.fixed_tau2;
  opts.eta = parse_eta(a.eta);
  const bke::HyperPosterior post = bke::mh_sample(split.remaining, split.landmarks, opts);

  const Eigen::Index per_chain = static_cast<Eigen::Index>(post.draws.size()) / std::max(1, post.chains);
  bke::Matrix table(static_cast<Eigen::Index>(post.draws.size()), 3);
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    table(i, 0) = post.draws[static_cast<std::size_t>(i)].theta;
    table(i, 1) = post.draws[static_cast<std::size_t>(i)].tau2;
    table(i, 2) = static_cast<double>(per_chain > 0 ? i / per_chain : 0);
  }
  emit(a.csv_out, bke::format_csv({"theta", "tau2", "chain"}, table));

  json out = envelope(sub, "sample");
  out["acceptance_rate"] = post.acceptance_rate;
  out["accepted"] = post.accepted;
  out["proposed"] = post.proposed;
  out["warmup_discarded"] = post.warmup_discarded;
  out["n_draws"] = post.draws.size();
  out["rhat"] = {{"theta", post.rhat_theta}, {"tau2", a.fixed_tau2 ? json(nullptr) : json(post.rhat_tau2)}};
  out["m"] = m;
  emit_json(a.json_out, out);
  return kOk;
}

struct EmbedArgs {
  std::string data, grid_file, eta = "inf", prior = "convolution", csv_out;
  double theta = 1.0, tau2 = 1.0;
};

int run_embed(const EmbedArgs& a) {
  const bke::Matrix data = load(a.data);
  const bke::CsvTable grid = bke::read_csv(a.grid_file);
  require_same_dim(data, grid.values, "embed");
  bke::SEKernelParams params{a.theta, parse_eta(a.eta), a.tau2};
  params.validate();
  const bke::PriorKernel prior =
      a.prior == "base" ? bke::PriorKernel::Base : bke::PriorKernel::Convolution;
  const bke::PosteriorEmbedding post = bke::posterior({data, params}, grid.values, prior);

  const Eigen::Index dim = grid.values.cols();
  bke::Matrix table(grid.values.rows(), dim + 2);
  table.leftCols(dim) = grid.values;
  table.col(dim) = post.mean;
  table.col(dim + 1) = post.covariance.diagonal();
  auto header = grid.header.empty() ? coordinate_names(dim) : grid.header;
  header.push_back("post_mean");
  header.push_back("post_var");
  emit(a.csv_out, bke::format_csv(header, table));
  return kOk;
}

bke::HyperPosterior read_hyper_draws(const std::string& path) {
  const bke::CsvTable t = bke::read_csv(path);
  Eigen::Index ct = 0, cv = 1;
  for (std::size_t k = 0; k < t.header.size(); ++k) {
    if (t.header[k] == "theta") ct = static_cast<Eigen::Index>(k);
    if (t.header[k] == "tau2") cv = static_cast<Eigen::Index>(k);
  }
  if (t.values.cols() < 2) throw bke::DataError(path + ": need theta and tau2 columns");
  bke::HyperPosterior post;
  post.chains = 1;
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    const double th = t.values(i, ct), v = t.values(i, cv);
    if (!(th > 0) || !(v > 0)) throw bke::DataError(path + ": draws must be positive");
    post.draws.push_back({th, v});
  }
  return post;
}

struct WitnessArgs {
  std::string p, q, grid_file, hyper, eta = "inf", csv_out;
  std::optional<double> theta;
  double tau2 = 1.0, level = 0.8;
  int draws = 800;
  std::uint64_t seed = 0;
};

int run_witness(const WitnessArgs& a) {
  const bke::Matrix p = load(a.p);
  const bke::Matrix q = load(a.q);
  const bke::CsvTable grid = bke::read_csv(a.grid_file);
  require_same_dim(p, q, "witness");
  require_same_dim(p, grid.values, "witness");
  bke::HyperSource source;
  if (a.theta) {
    bke::SEKernelParams params{*a.theta, parse_eta(a.eta), a.tau2};
    params.validate();
    source = params;
  } else {
    bke::HyperPosterior post = read_hyper_draws(a.hyper);
    post.eta = parse_eta(a.eta);
    source = std::move(post);
  }
  const bke::WitnessBand band = bke::witness_band(p, q, grid.values, source, a.level, a.draws, a.seed);

  const Eigen::Index dim = grid.values.cols();
  bke::Matrix table(grid.values.rows(), dim + 3);
  table.leftCols(dim) = grid.values;
  table.col(dim) = band.mean;
  table.col(dim + 1) = band.lower;
  table.col(dim + 2) = band.upper;
  auto header = grid.header.empty() ? coordinate_names(dim) : grid.header;
  header.insert(header.end(), {"mean", "lower", "upper"});
  emit(a.csv_out, bke::format_csv(header, table));
  return kOk;
}

struct Test2Args {
  std::string p, q, median, grid = "0.05:50:60", eta = "inf", variant = "biased", json_out;
  std::optional<double> theta;
  bool bkl = false;
  double tau2 = 1.0, alpha = 0.05;
  int perms = 500;
  std::optional<long> m;
  std::uint64_t seed = 0;
};

int run_test2(const Test2Args& a, const CLI::App* sub) {
  bke::Matrix p = load(a.p);
  bke::Matrix q = load(a.q);
  require_same_dim(p, q, "test2");
  json out = envelope(sub, "test2");
  bke::SEKernelParams params{1.0, parse_eta(a.eta), a.tau2};

  if (a.theta) {
    params.theta = *a.theta;
    out["lengthscale_source"] = "fixed";
  } else if (!a.median.empty()) {
    bke::Matrix pooled(p.rows() + q.rows(), p.cols());
    pooled << p, q;
    params.theta = bke::median_heuristic(pooled, parse_median_mode(a.median));
    out["lengthscale_source"] = "median-" + a.median;
  } else {
    // Landmarks come from the pooled sample and are removed from both
    // samples before testing.
    bke::Matrix pooled(p.rows() + q.rows(), p.cols());
    pooled << p, q;
    const Eigen::Index m = a.m ? *a.m : bke::default_landmark_count(pooled.rows(), pooled.cols());
    const auto split = bke::choose_landmarks(pooled, m, a.seed);
    bke::BKLOptions opts;
    opts.eta = params.eta;
    const auto res = bke::bkl_optimize(split.remaining, split.landmarks, a.tau2, parse_log_grid(a.grid), opts);
    params.theta = res.theta_hat;

    Eigen::Index np = 0;
    for (Eigen::Index r : split.remaining_rows) np += r < p.rows() ? 1 : 0;
    bke::Matrix p_rest(np, p.cols()), q_rest(split.remaining.rows() - np, p.cols());
    Eigen::Index ip = 0, iq = 0;
    for (std::size_t k = 0; k < split.remaining_rows.size(); ++k) {
      const auto row = split.remaining.row(static_cast<Eigen::Index>(k));
      if (split.remaining_rows[k] < p.rows()) {
        p_rest.row(ip++) = row;
      } else {
        q_rest.row(iq++) = row;
      }
    }
    if (p_rest.rows() < 2 || q_rest.rows() < 2) {
      throw bke::DataError("too few observations left after removing landmarks");
    }
    p = std::move(p_rest);
    q = std::move(q_rest);
    out["lengthscale_source"] = "bkl";
    out["bkl"] = {{"theta_hat", res.theta_hat}, {"local_optima", res.local_optima}, {"m", m}};
  }
  params.validate();

  bke::PermutationConfig cfg{a.perms, a.alpha, a.seed};
  const bke::MMDVariant variant = a.variant == "unbiased" ? bke::MMDVariant::Unbiased : bke::MMDVariant::Biased;
  const bke::TestResult r = bke::mmd_permutation_test(p, q, params, variant, cfg);
  out.update(test_result_json(r));
  out["n_p"] = p.rows();
  out["n_q"] = q.rows();
  emit_json(a.json_out, out);
  return kOk;
}

struct TestIndepArgs {
  std::string x, y, median = "no-half", json_out;
  std::optional<double> theta_x, theta_y;
  double alpha = 0.05;
  int perms = 500;
  std::uint64_t seed = 0;
};

int run_testindep(const TestIndepArgs& a, const CLI::App* sub) {
  const bke::Matrix x = load(a.x);
  const bke::Matrix y = load(a.y);
  if (x.rows() != y.rows()) throw bke::DataError("testindep: x and y need the same number of rows");
  const bke::MedianMode mode = parse_median_mode(a.median);
  bke::SEKernelParams px, py;
  px.theta = a.theta_x ? *a.theta_x : bke::median_heuristic(x, mode);
  py.theta = a.theta_y ? *a.theta_y : bke::median_heuristic(y, mode);
  px.validate();
  py.validate();
  const bke::TestResult r = bke::hsic_permutation_test(x, y, px, py, {a.perms, a.alpha, a.seed});
  json out = envelope(sub, "testindep");
  out.update(test_result_json(r));
  out["n"] = x.rows();
  emit_json(a.json_out, out);
  return kOk;
}

struct GridMixtureArgs {
  bke::GridMixtureSpec spec;
  std::uint64_t seed = 0;
  std::string csv_out;
};

int run_grid_mixture(const GridMixtureArgs& a) {
  const bke::Matrix data = bke::gen_grid_mixture(a.spec, a.seed);
  emit(a.csv_out, bke::format_csv(coordinate_names(2), data));
  return kOk;
}

struct NormalLaplaceArgs {
  long n = 100;
  std::uint64_t seed = 0;
  std::string csv_p, csv_q;
};

int run_normal_laplace(const NormalLaplaceArgs& a) {
  if (a.n < 1) throw bke::InvalidInput("n must be at least 1");
  const auto [p, q] = bke::gen_normal_laplace(a.n, a.seed);
  if (a.csv_p.empty() && a.csv_q.empty()) {
    bke::Matrix both(p.rows(), 2);
    both << p, q;
    emit("", bke::format_csv({"p", "q"}, both));
    return kOk;
  }
  if (a.csv_p.empty() || a.csv_q.empty()) throw bke::InvalidInput("give both --csv-p and --csv-q");
  emit(a.csv_p, bke::format_csv({"x1"}, p));
  emit(a.csv_q, bke::format_csv({"x1"}, q));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian kernel embeddings: lengthscale learning, posterior embeddings and kernel tests"};
  app.set_version_flag("--version", bke::kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  LearnArgs learn;
  auto* c_learn = app.add_subcommand("learn", "maximum pseudolikelihood lengthscale");
  c_learn->add_option("--data", learn.data, "data CSV")->required()->check(CLI::ExistingFile);
  c_learn->add_option("--tau2", learn.tau2, "likelihood variance");
  c_learn->add_option("--m", learn.m, "landmark count (default depends on n and D)");
  c_learn->add_option("--grid", learn.grid, "log grid lo:hi:count");
  c_learn->add_option("--eta", learn.eta, "prior measure width, or inf");
  c_learn->add_option("--seed", learn.seed, "landmark selection seed");
  c_learn->add_flag("--no-refine", learn.no_refine, "skip golden-section refinement");
  c_learn->add_option("--json", learn.json_out, "JSON output path (default stdout)");
  c_learn->add_option("--csv", learn.csv_out, "curve CSV output path");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Metropolis sampling of (theta, tau2)");
  c_sample->add_option("--data", sample.data, "data CSV")->required()->check(CLI::ExistingFile);
  c_sample->add_option("--iters", sample.iters, "iterations per chain");
  c_sample->add_option("--warmup", sample.warmup, "warmup iterations per chain");
  c_sample->add_option("--chains", sample.chains, "number of chains");
  c_sample->add_option("--thin", sample.thin, "keep every k-th post-warmup draw");
  c_sample->add_option("--proposal-scale", sample.proposal_scale, "random-walk step in log space");
  c_sample->add_option("--fixed-tau2", sample.fixed_tau2, "hold tau2 fixed and sample theta only");
  c_sample->add_option("--m", sample.m, "landmark count");
  c_sample->add_option("--eta", sample.eta, "prior measure width, or inf");
  c_sample->add_option("--seed", sample.seed, "seed");
  c_sample->add_option("--csv", sample.csv_out, "draws CSV output path")->required();
  c_sample->add_option("--json", sample.json_out, "JSON summary path (default stdout)");

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "posterior mean and variance of the embedding");
  c_embed->add_option("--data", embed.data, "data CSV")->required()->check(CLI::ExistingFile);
  c_embed->add_option("--grid-file", embed.grid_file, "evaluation points CSV")->required()->check(CLI::ExistingFile);
  c_embed->add_option("--theta", embed.theta, "lengthscale");
  c_embed->add_option("--tau2", embed.tau2, "likelihood variance");
  c_embed->add_option("--eta", embed.eta, "prior measure width, or inf");
  c_embed->add_option("--prior", embed.prior, "prior kernel")->check(CLI::IsMember({"convolution", "base"}));
  c_embed->add_option("--csv", embed.csv_out, "output CSV (default stdout)");

  WitnessArgs wit;
  auto* c_wit = app.add_subcommand("witness", "posterior band for the witness function");
  c_wit->add_option("--p", wit.p, "first sample CSV")->required()->check(CLI::ExistingFile);
  c_wit->add_option("--q", wit.q, "second sample CSV")->required()->check(CLI::ExistingFile);
  c_wit->add_option("--grid-file", wit.grid_file, "evaluation points CSV")->required()->check(CLI::ExistingFile);
  auto* o_theta = c_wit->add_option("--theta", wit.theta, "fixed lengthscale");
  auto* o_hyper = c_wit->add_option("--hyper", wit.hyper, "hyperparameter draws CSV")->check(CLI::ExistingFile);
  o_theta->excludes(o_hyper);
  c_wit->add_option("--tau2", wit.tau2, "likelihood variance with --theta");
  c_wit->add_option("--eta", wit.eta, "prior measure width, or inf");
  c_wit->add_option("--level", wit.level, "band level");
  c_wit->add_option("--draws", wit.draws, "function draws");
  c_wit->add_option("--seed", wit.seed, "seed");
  c_wit->add_option("--csv", wit.csv_out, "output CSV (default stdout)");

  Test2Args t2;
  auto* c_t2 = app.add_subcommand("test2", "MMD permutation two-sample test");
  c_t2->add_option("--p", t2.p, "first sample CSV")->required()->check(CLI::ExistingFile);
  c_t2->add_option("--q", t2.q, "second sample CSV")->required()->check(CLI::ExistingFile);
  auto* t2_theta = c_t2->add_option("--theta", t2.theta, "fixed lengthscale");
  auto* t2_med = c_t2->add_option("--median-heuristic", t2.median, "no-half or half")
                     ->check(CLI::IsMember({"no-half", "half"}));
  auto* t2_bkl = c_t2->add_flag("--bkl", t2.bkl, "learn the lengthscale on held-out landmarks");
  t2_theta->excludes(t2_med)->excludes(t2_bkl);
  t2_med->excludes(t2_bkl);
  c_t2->add_option("--tau2", t2.tau2, "likelihood variance for --bkl");
  c_t2->add_option("--m", t2.m, "landmark count for --bkl");
  c_t2->add_option("--grid", t2.grid, "log grid lo:hi:count for --bkl");
  c_t2->add_option("--eta", t2.eta, "prior measure width, or inf");
  c_t2->add_option("--variant", t2.variant, "biased or unbiased")->check(CLI::IsMember({"biased", "unbiased"}));
  c_t2->add_option("--perms", t2.perms, "permutations");
  c_t2->add_option("--alpha", t2.alpha, "test level");
  c_t2->add_option("--seed", t2.seed, "seed");
  c_t2->add_option("--json", t2.json_out, "JSON output path (default stdout)");

  TestIndepArgs ti;
  auto* c_ti = app.add_subcommand("testindep", "HSIC permutation independence test");
  c_ti->add_option("--x", ti.x, "first variable CSV")->required()->check(CLI::ExistingFile);
  c_ti->add_option("--y", ti.y, "second variable CSV")->required()->check(CLI::ExistingFile);
  c_ti->add_option("--theta-x", ti.theta_x, "lengthscale for x (default median heuristic)");
  c_ti->add_option("--theta-y", ti.theta_y, "lengthscale for y (default median heuristic)");
  c_ti->add_option("--median-heuristic", ti.median, "no-half or half")->check(CLI::IsMember({"no-half", "half"}));
  c_ti->add_option("--perms", ti.perms, "permutations");
  c_ti->add_option("--alpha", ti.alpha, "test level");
  c_ti->add_option("--seed", ti.seed, "seed");
  c_ti->add_option("--json", ti.json_out, "JSON output path (default stdout)");

  auto* c_synth = app.add_subcommand("synth", "synthetic data generators");
  c_synth->require_subcommand(1);
  GridMixtureArgs gm;
  auto* c_gm = c_synth->add_subcommand("grid-mixture", "Gaussian mixture on a square grid");
  c_gm->add_option("--grid-side", gm.spec.grid_side, "components per side");
  c_gm->add_option("--spacing", gm.spec.spacing, "distance between neighbouring centres");
  c_gm->add_option("--eps", gm.spec.eps, "eigenvalue ratio of rotated components");
  c_gm->add_option("--per-component", gm.spec.per_component, "draws per component");
  c_gm->add_flag("--rotated", gm.spec.rotated, "randomly rotated anisotropic components");
  c_gm->add_option("--seed", gm.seed, "seed");
  c_gm->add_option("--csv", gm.csv_out, "output CSV (default stdout)");
  NormalLaplaceArgs nl;
  auto* c_nl = c_synth->add_subcommand("normal-laplace", "standard normal and unit-variance Laplace samples");
  c_nl->add_option("--n", nl.n, "draws per sample");
  c_nl->add_option("--seed", nl.seed, "seed");
  c_nl->add_option("--csv-p", nl.csv_p, "normal sample CSV");
  c_nl->add_option("--csv-q", nl.csv_q, "Laplace sample CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_learn) return run_learn(learn, c_learn);
    if (*c_sample) return run_sample(sample, c_sample);
    if (*c_embed) return run_embed(embed);
    if (*c_wit) {
      if (!wit.theta && wit.hyper.empty()) throw bke::InvalidInput("witness needs --theta or --hyper");
      return run_witness(wit);
    }
    if (*c_t2) {
      if (!t2.theta && t2.median.empty() && !t2.bkl) {
        throw bke::InvalidInput("test2 needs one of --theta, --median-heuristic, --bkl");
      }
      return run_test2(t2, c_t2);
    }
    if (*c_ti) return run_testindep(ti, c_ti);
    if (*c_gm) return run_grid_mixture(gm);
    if (*c_nl) return run_normal_laplace(nl);
  } catch (const bke::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const bke::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const bke::DegenerateData& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const bke::ConditioningError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const bke::OptimizationFailed& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
