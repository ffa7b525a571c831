#include "bke/embedding.hpp"

#include "bke/kernels.hpp"
#include "bke/linalg.hpp"

namespace bke {

namespace {
void check_embedding(const EmpiricalEmbedding& emb, const Eigen::Ref<const Matrix>& query) {
  if (emb.data.rows() < 1) throw InvalidInput("embedding needs at least one observation");
  if (query.rows() < 1) throw InvalidInput("query must contain at least one point");
  detail::check_same_dim(emb.data.cols(), query.cols());
  emb.params.validate();
}
}  // namespace

Vector empirical_eval(const EmpiricalEmbedding& emb, const Eigen::Ref<const Matrix>& query) {
  check_embedding(emb, query);
  const Matrix k = gram(query, emb.data, emb.params, GramKind::K);
  return k.rowwise().mean();
}

PosteriorEmbedding posterior(const EmpiricalEmbedding& emb, const Eigen::Ref<const Matrix>& query,
                             PriorKernel prior) {
  check_embedding(emb, query);
  const GramKind kind = prior == PriorKernel::Convolution ? GramKind::R : GramKind::K;
  const auto n = emb.data.rows();
  const Vector v = empirical_eval(emb, emb.data);

  Matrix a = gram(emb.data, emb.params, kind);
  a.diagonal().array() += emb.params.tau2 / static_cast<double>(n);
  const JitteredCholesky chol = cholesky_with_jitter(a);

  const Matrix cross = gram(query, emb.data, emb.params, kind);  // p x n
  PosteriorEmbedding out;
  out.eval_points = query;
  out.mean = cross * chol.solve(v);
  // cov = R_qq - W^T W with W = L^{-1} R_xq.
  const Matrix w = chol.llt.matrixL().solve(cross.transpose());
  Matrix cov = gram(query, emb.params, kind);
  cov.noalias() -= w.transpose() * w;
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

Vector skmse_eval(const Eigen::Ref<const Matrix>& data, const SEKernelParams& params,
                  const SKMSEConfig& cfg, const Eigen::Ref<const Matrix>& query) {
  if (!(cfg.lambda >= 0) || !std::isfinite(cfg.lambda)) {
    throw InvalidInput("shrinkage lambda must be finite and >= 0");
  }
  const EmpiricalEmbedding emb{Matrix(data), params};
  check_embedding(emb, query);
  const auto n = data.rows();
  const Vector v = empirical_eval(emb, data);
  Matrix a = gram(data, params, GramKind::K);
  a.diagonal().array() += static_cast<double>(n) * cfg.lambda;
  const JitteredCholesky chol = cholesky_with_jitter(a);
  return gram(query, data, params, GramKind::K) * chol.solve(v);
}

PosteriorEmbedding witness(const PosteriorEmbedding& p, const PosteriorEmbedding& q) {
  if (p.eval_points.rows() != q.eval_points.rows() || p.eval_points.cols() != q.eval_points.cols() ||
      p.eval_points != q.eval_points) {
    throw InvalidInput("witness needs both posteriors on identical evaluation points");
  }
  return {p.eval_points, p.mean - q.mean, p.covariance + q.covariance};
}

}  // namespace bke
