#pragma once

#include "smnreg/mixing.hpp"
#include "smnreg/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

// Data-parallel inner loops, OpenMP-parallelized over observations,
// replicates, or lags.  Every kernel here is deterministic and independent
// of the number of threads:
//
//  * per-element kernels (residual quadratic forms, latent draws, synthetic
//    rows) write disjoint outputs, each latent/row from its own seeded
//    substream;
//  * reductions accumulate fixed-size blocks (kReductionBlock elements) in
//    parallel and combine the block partials serially in block order, so
//    the floating-point summation order never depends on the thread count.
//
// smnreg::reference holds plain serial implementations of the same
// contracts, kept for testing and for the kernel benchmark.

namespace smnreg::kernels {

inline constexpr Eigen::Index kReductionBlock = 1024;

// r_i = (beta^T x_i - y_i)^T Sigma^{-1} (beta^T x_i - y_i), with Sigma
// applied through its lower Cholesky factor (forward solve per row).
Eigen::VectorXd residual_quadforms(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                   const Eigen::MatrixXd& beta,
                                   const Eigen::MatrixXd& sigma_chol_lower);

// Blocked deterministic sum.
double blocked_sum(const Eigen::VectorXd& values);

// Draws z_i ~ psi(.; r_i), one substream per observation.
Eigen::VectorXd sample_latents(const MixingDensity& mixing, const Eigen::VectorXd& r,
                               const std::vector<std::uint64_t>& seeds);

// X^T W X, X^T W Y, Y^T W Y with W = diag(z).
struct WeightedGram {
  Eigen::MatrixXd xtwx;
  Eigen::MatrixXd xtwy;
  Eigen::MatrixXd ytwy;
};

WeightedGram weighted_gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                           const Eigen::VectorXd& z);

// Synthetic response rows y_i = beta^T x_i + L_sigma eps_i with
// eps_i ~ N(0, I_d / u_i), u_i ~ h; one substream per row (the scale u_i
// is drawn first, then the d normal coordinates).
Eigen::MatrixXd synth_rows(const Eigen::MatrixXd& X, const Eigen::MatrixXd& beta,
                           const Eigen::MatrixXd& sigma_chol_lower,
                           const MixingDensity& mixing,
                           const std::vector<std::uint64_t>& seeds);

// Autocorrelations rho_0..rho_max_lag (biased estimator), parallel over lags.
Eigen::VectorXd autocorrelations(const Eigen::VectorXd& series, int max_lag);

}  // namespace smnreg::kernels

namespace smnreg::reference {

Eigen::VectorXd residual_quadforms(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                   const Eigen::MatrixXd& beta,
                                   const Eigen::MatrixXd& sigma_chol_lower);

double plain_sum(const Eigen::VectorXd& values);

Eigen::VectorXd sample_latents(const MixingDensity& mixing, const Eigen::VectorXd& r,
                               const std::vector<std::uint64_t>& seeds);

kernels::WeightedGram weighted_gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const Eigen::VectorXd& z);

Eigen::MatrixXd synth_rows(const Eigen::MatrixXd& X, const Eigen::MatrixXd& beta,
                           const Eigen::MatrixXd& sigma_chol_lower,
                           const MixingDensity& mixing,
                           const std::vector<std::uint64_t>& seeds);

Eigen::VectorXd autocorrelations(const Eigen::VectorXd& series, int max_lag);

}  // namespace smnreg::reference
