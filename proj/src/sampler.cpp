#include "smnreg/sampler.hpp"

#include "smnreg/kernels.hpp"

#include <cmath>
#include <cstdio>

namespace smnreg {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd symmetrize(MatrixXd m) { return 0.5 * (m + m.transpose()); }

void require_square_symmetric(const MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + " must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(what) + " must be symmetric");
}

double iw_degrees_of_freedom(const Dataset& data, const PriorSpec& prior) {
  return data.n() - data.p() + 2.0 * prior.a - data.d() - 1.0;
}

}  // namespace

WeightedStats weighted_stats(const VectorXd& z, const Dataset& data) {
  if (z.size() != data.n())
    throw std::invalid_argument("latent vector length must equal the number of observations");
  if (!(z.minCoeff() > 0.0))
    throw std::invalid_argument("latent weights must be strictly positive");

  const kernels::WeightedGram gram = kernels::weighted_gram(data.X(), data.Y(), z);

  const Eigen::LLT<MatrixXd> llt(gram.xtwx);
  if (llt.info() != Eigen::Success)
    throw NumericError(
        "weighted Gram matrix X^T Q^{-1} X is numerically singular or not positive definite");
  const double rcond = llt.rcond();
  if (rcond < 1e-14) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "weighted Gram matrix numerically singular (rcond ~ %.3e)", rcond);
    throw NumericError(buf);
  }

  const MatrixXd L = llt.matrixL();
  // K = L^{-1} X^T W y; then mu = L^{-T} K and S = y^T W y - K^T K.
  MatrixXd K = gram.xtwy;
  L.triangularView<Eigen::Lower>().solveInPlace(K);
  MatrixXd mu = K;
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(mu);

  MatrixXd linv = MatrixXd::Identity(data.p(), data.p());
  L.triangularView<Eigen::Lower>().solveInPlace(linv);

  WeightedStats stats;
  stats.omega = symmetrize(linv.transpose() * linv);
  stats.mu = std::move(mu);
  stats.S = symmetrize(gram.ytwy - K.transpose() * K);
  return stats;
}

MatrixXd sample_inverse_wishart(double m, const MatrixXd& theta, rng::Stream& stream) {
  require_square_symmetric(theta, "inverse Wishart scale");
  const Index d = theta.rows();
  if (!(m > d - 1.0))
    throw std::invalid_argument("inverse Wishart requires degrees of freedom m > d - 1");

  const Eigen::LLT<MatrixXd> llt(theta);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("inverse Wishart scale must be positive definite");

  // Bartlett factor: lower triangular, chi-square diagonal, normal
  // subdiagonal, drawn row-major.
  MatrixXd bartlett = MatrixXd::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < i; ++j) bartlett(i, j) = stream.normal();
    bartlett(i, i) = std::sqrt(stream.chi_squared(m - static_cast<double>(i)));
  }

  // V = (L A)(L A)^T ~ Wishart(m, Theta); the returned draw is V^{-1}.
  const MatrixXd factor = MatrixXd(llt.matrixL()) * bartlett;
  MatrixXd finv = MatrixXd::Identity(d, d);
  factor.triangularView<Eigen::Lower>().solveInPlace(finv);
  return symmetrize(finv.transpose() * finv);
}

MatrixXd sample_matrix_normal(const MatrixXd& theta, const MatrixXd& A, const MatrixXd& B,
                              rng::Stream& stream) {
  require_square_symmetric(A, "matrix normal row covariance");
  require_square_symmetric(B, "matrix normal column covariance");
  const Index r = theta.rows(), c = theta.cols();
  if (A.rows() != r || B.rows() != c)
    throw std::invalid_argument("matrix normal covariance dimensions must match the mean");

  const Eigen::LLT<MatrixXd> llt_a(A);
  if (llt_a.info() != Eigen::Success)
    throw std::invalid_argument("matrix normal row covariance must be positive definite");
  const Eigen::LLT<MatrixXd> llt_b(B);
  if (llt_b.info() != Eigen::Success)
    throw std::invalid_argument("matrix normal column covariance must be positive definite");

  MatrixXd g(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) g(i, j) = stream.normal();

  return theta + MatrixXd(llt_a.matrixL()) * g * MatrixXd(llt_b.matrixL()).transpose();
}

std::pair<ChainState, VectorXd> da_step(const ChainState& state, const Dataset& data,
                                        const PriorSpec& prior, const MixingDensity& mixing,
                                        rng::Stream& stream) {
  const int n = data.n(), p = data.p(), d = data.d();
  if (state.beta.rows() != p || state.beta.cols() != d)
    throw std::invalid_argument("state beta must be p x d");
  if (state.sigma.rows() != d || state.sigma.cols() != d)
    throw std::invalid_argument("state sigma must be d x d");
  if (mixing.dim() != d)
    throw std::invalid_argument("mixing dimension must equal the response dimension");

  const Eigen::LLT<MatrixXd> sigma_llt(state.sigma);
  if (sigma_llt.info() != Eigen::Success)
    throw std::invalid_argument("state sigma must be symmetric positive definite");

  // Step 1: latent draws, one substream per observation.
  const VectorXd r = kernels::residual_quadforms(data.X(), data.Y(), state.beta,
                                                 MatrixXd(sigma_llt.matrixL()));
  std::vector<std::uint64_t> seeds(n);
  for (auto& s : seeds) s = stream.next_u64();
  VectorXd z = kernels::sample_latents(mixing, r, seeds);

  // Step 2: Sigma' ~ IW_d(n - p + 2a - d - 1, S^{-1}).
  const WeightedStats stats = weighted_stats(z, data);
  const Eigen::LLT<MatrixXd> llt_s(stats.S);
  if (llt_s.info() != Eigen::Success)
    throw NumericError("degenerate weighted statistics: S is not positive definite");
  const MatrixXd theta = symmetrize(llt_s.solve(MatrixXd::Identity(d, d)));
  MatrixXd sigma_new = sample_inverse_wishart(iw_degrees_of_freedom(data, prior), theta, stream);

  // Step 3: beta' ~ MN(mu, Omega, Sigma').
  MatrixXd beta_new = sample_matrix_normal(stats.mu, stats.omega, sigma_new, stream);

  return {ChainState{std::move(beta_new), std::move(sigma_new)}, std::move(z)};
}

ChainState ols_init(const Dataset& data) {
  const int n = data.n(), p = data.p();
  if (n <= p) throw std::invalid_argument("OLS start requires n > p");
  MatrixXd beta = data.X().householderQr().solve(data.Y());
  const MatrixXd resid = data.Y() - data.X() * beta;
  MatrixXd sigma = symmetrize(resid.transpose() * resid / static_cast<double>(n - p));
  if (Eigen::LLT<MatrixXd>(sigma).info() != Eigen::Success)
    throw NumericError("OLS residual cross-product is not positive definite (rank condition?)");
  return ChainState{std::move(beta), std::move(sigma)};
}

ChainTrace run_chain(const ChainState& init, long iters, long burn_in, long thin,
                     const Dataset& data, const PriorSpec& prior, const MixingDensity& mixing,
                     std::uint64_t seed, bool record_latents, const RunHooks* hooks) {
  if (burn_in < 0) throw std::invalid_argument("burn-in must be >= 0");
  if (iters <= burn_in) throw std::invalid_argument("iterations must exceed burn-in");
  if (thin < 1) throw std::invalid_argument("thinning interval must be >= 1");
  const double m = iw_degrees_of_freedom(data, prior);
  if (!(m > data.d() - 1.0))
    throw std::invalid_argument(
        "inverse Wishart degrees of freedom n - p + 2a - d - 1 must exceed d - 1 "
        "(sample-size condition)");

  ChainTrace trace;
  trace.meta = TraceMeta{data.n(), data.p(), data.d(), prior.a, mixing.name(),
                         seed,     iters,    burn_in,  thin};
  const long retained = (iters - burn_in) / thin;
  trace.states.reserve(retained);
  trace.iteration_index.reserve(retained);
  if (record_latents) trace.latents.reserve(retained);

  rng::Stream stream(seed);
  ChainState state = init;
  for (long mth = 1; mth <= iters; ++mth) {
    auto [next, z] = da_step(state, data, prior, mixing, stream);
    state = std::move(next);
    if (mth > burn_in && (mth - burn_in) % thin == 0) {
      trace.states.push_back(state);
      trace.iteration_index.push_back(mth);
      if (record_latents) trace.latents.push_back(z);
      if (hooks && hooks->on_retained) hooks->on_retained(mth, state, z);
    }
  }
  return trace;
}

}  // namespace smnreg
