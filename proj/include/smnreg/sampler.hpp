#pragma once

#include "smnreg/model.hpp"
#include "smnreg/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

// The data augmentation sampler.  One iteration from state (beta, Sigma):
//
//   1. draw latents z_i ~ psi(.; r_i) with r_i = (beta^T x_i - y_i)^T
//      Sigma^{-1} (beta^T x_i - y_i);
//   2. draw Sigma' ~ IW_d(n - p + 2a - d - 1, S^{-1}) where
//      S = y^T Q^{-1} y - mu^T Omega^{-1} mu, Q^{-1} = diag(z);
//   3. draw beta' ~ MN(mu, Omega, Sigma') with Omega = (X^T Q^{-1} X)^{-1},
//      mu = Omega X^T Q^{-1} y.

namespace smnreg {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChainState {
  Eigen::MatrixXd beta;   // p x d
  Eigen::MatrixXd sigma;  // d x d, symmetric positive definite
};

struct WeightedStats {
  Eigen::MatrixXd omega;  // (X^T Q^{-1} X)^{-1}, p x p SPD
  Eigen::MatrixXd mu;     // Omega X^T Q^{-1} y,  p x d
  Eigen::MatrixXd S;      // y^T Q^{-1} y - mu^T Omega^{-1} mu, d x d SPD
};

struct TraceMeta {
  int n = 0, p = 0, d = 0;
  double a = 0.0;
  std::string mixing;
  std::uint64_t seed = 0;
  long iters = 0, burn_in = 0, thin = 1;
};

struct ChainTrace {
  std::vector<ChainState> states;
  std::vector<long> iteration_index;       // 1-based iteration of each retained state
  std::vector<Eigen::VectorXd> latents;    // filled only when requested
  TraceMeta meta;
};

// Weighted regression statistics from the latent vector, computed through a
// Cholesky factorization of the weighted Gram matrix (no explicit inverse of
// X^T Q^{-1} X is formed on the solve path; Omega itself comes from the
// triangular factor).  Throws NumericError with a condition estimate when
// the weighted Gram matrix is numerically singular.
WeightedStats weighted_stats(const Eigen::VectorXd& z, const Dataset& data);

// Inverse Wishart IW_d(m, Theta): the draw W satisfies W^{-1} ~ Wishart with
// m degrees of freedom and scale Theta, so E[W^{-1}] = m Theta and, for
// m > d + 1, E[W] = Theta^{-1} / (m - d - 1).  Requires m > d - 1.
// Bartlett construction; SPD by construction.
Eigen::MatrixXd sample_inverse_wishart(double m, const Eigen::MatrixXd& theta,
                                       rng::Stream& stream);

// Matrix normal MN(theta, A, B): theta + L_A G L_B^T with G an r x c matrix
// of independent standard normals (drawn row-major) and L_A, L_B the lower
// Cholesky factors.  cov(vec Z) = B (x) A.
Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& A,
                                     const Eigen::MatrixXd& B, rng::Stream& stream);

// One DA iteration; returns the new state and the latent vector that
// produced it.  The n latent substreams are seeded from the stream
// serially, then drawn in parallel, so results do not depend on thread
// count.
std::pair<ChainState, Eigen::VectorXd> da_step(const ChainState& state, const Dataset& data,
                                               const PriorSpec& prior,
                                               const MixingDensity& mixing,
                                               rng::Stream& stream);

// Default start: ordinary least squares coefficients and the residual
// cross-product scaled by 1/(n-p).
ChainState ols_init(const Dataset& data);

struct RunHooks {
  // Called for each retained state (after burn-in/thinning).
  std::function<void(long iteration, const ChainState& state, const Eigen::VectorXd& z)>
      on_retained;
};

// Runs the chain for `iters` iterations and retains every `thin`-th state
// after `burn_in`; reproducible from the seed.
ChainTrace run_chain(const ChainState& init, long iters, long burn_in, long thin,
                     const Dataset& data, const PriorSpec& prior, const MixingDensity& mixing,
                     std::uint64_t seed, bool record_latents = false,
                     const RunHooks* hooks = nullptr);

}  // namespace smnreg
