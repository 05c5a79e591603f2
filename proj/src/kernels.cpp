#include "smnreg/kernels.hpp"

#include <atomic>
#include <exception>
#include <stdexcept>

namespace smnreg {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_residual_dims(const MatrixXd& X, const MatrixXd& Y, const MatrixXd& beta,
                         const MatrixXd& L) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (beta.rows() != X.cols() || beta.cols() != Y.cols())
    throw std::invalid_argument("beta must be p x d");
  if (L.rows() != Y.cols() || L.cols() != Y.cols())
    throw std::invalid_argument("sigma factor must be d x d");
}

// One observation's quadratic form through the lower-triangular factor.
double quadform_row(const MatrixXd& X, const MatrixXd& Y, const MatrixXd& beta,
                    const MatrixXd& L, Index i, VectorXd& work) {
  work.noalias() = beta.transpose() * X.row(i).transpose() - Y.row(i).transpose();
  L.triangularView<Eigen::Lower>().solveInPlace(work);
  return work.squaredNorm();
}

// Runs a parallel for loop whose body may throw; the first exception is
// captured and rethrown after the loop.
template <typename Body>
void parallel_for_captured(Index n, const Body& body) {
  std::exception_ptr error = nullptr;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      body(i);
    } catch (...) {
#pragma omp critical(smnreg_kernel_error)
      {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

double synth_row_impl(const MatrixXd& X, const MatrixXd& beta, const MatrixXd& L,
                      const MixingDensity& mixing, std::uint64_t seed, Index i,
                      MatrixXd& Y_out) {
  rng::Stream stream(seed);
  const double u = mixing.sample_h(stream);
  const Index d = beta.cols();
  VectorXd eps(d);
  const double scale = 1.0 / std::sqrt(u);
  for (Index j = 0; j < d; ++j) eps(j) = stream.normal() * scale;
  Y_out.row(i) = (beta.transpose() * X.row(i).transpose() + L * eps).transpose();
  return u;
}

double autocorr_at_lag(const VectorXd& centered, double denom, int lag) {
  if (lag == 0) return 1.0;
  if (denom <= 0.0) return 0.0;
  const Index n = centered.size();
  double num = 0.0;
  for (Index t = 0; t + lag < n; ++t) num += centered(t) * centered(t + lag);
  return num / denom;
}

}  // namespace

namespace kernels {

VectorXd residual_quadforms(const MatrixXd& X, const MatrixXd& Y, const MatrixXd& beta,
                            const MatrixXd& sigma_chol_lower) {
  check_residual_dims(X, Y, beta, sigma_chol_lower);
  const Index n = X.rows();
  VectorXd r(n);
#pragma omp parallel
  {
    VectorXd work(Y.cols());
#pragma omp for schedule(static)
    for (Index i = 0; i < n; ++i) r(i) = quadform_row(X, Y, beta, sigma_chol_lower, i, work);
  }
  return r;
}

double blocked_sum(const VectorXd& values) {
  const Index n = values.size();
  const Index nblocks = (n + kReductionBlock - 1) / kReductionBlock;
  if (nblocks <= 1) return values.sum();
  VectorXd partial(nblocks);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nblocks; ++b) {
    const Index lo = b * kReductionBlock;
    const Index len = std::min(kReductionBlock, n - lo);
    partial(b) = values.segment(lo, len).sum();
  }
  double total = 0.0;
  for (Index b = 0; b < nblocks; ++b) total += partial(b);
  return total;
}

VectorXd sample_latents(const MixingDensity& mixing, const VectorXd& r,
                        const std::vector<std::uint64_t>& seeds) {
  if (static_cast<Index>(seeds.size()) != r.size())
    throw std::invalid_argument("one seed per latent draw required");
  const Index n = r.size();
  VectorXd z(n);
  parallel_for_captured(n, [&](Index i) {
    rng::Stream stream(seeds[i]);
    z(i) = draw_latent(mixing, r(i), stream);
  });
  return z;
}

WeightedGram weighted_gram(const MatrixXd& X, const MatrixXd& Y, const VectorXd& z) {
  if (X.rows() != Y.rows() || X.rows() != z.size())
    throw std::invalid_argument("X, Y and z must have matching row counts");
  const Index n = X.rows(), p = X.cols(), d = Y.cols();
  const Index nblocks = (n + kReductionBlock - 1) / kReductionBlock;

  std::vector<MatrixXd> gx(nblocks), gxy(nblocks), gy(nblocks);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nblocks; ++b) {
    const Index lo = b * kReductionBlock;
    const Index len = std::min(kReductionBlock, n - lo);
    MatrixXd bx = MatrixXd::Zero(p, p);
    MatrixXd bxy = MatrixXd::Zero(p, d);
    MatrixXd by = MatrixXd::Zero(d, d);
    for (Index i = lo; i < lo + len; ++i) {
      const auto xi = X.row(i).transpose();
      const auto yi = Y.row(i).transpose();
      bx.noalias() += z(i) * (xi * xi.transpose());
      bxy.noalias() += z(i) * (xi * yi.transpose());
      by.noalias() += z(i) * (yi * yi.transpose());
    }
    gx[b] = std::move(bx);
    gxy[b] = std::move(bxy);
    gy[b] = std::move(by);
  }

  WeightedGram out{MatrixXd::Zero(p, p), MatrixXd::Zero(p, d), MatrixXd::Zero(d, d)};
  for (Index b = 0; b < nblocks; ++b) {
    out.xtwx += gx[b];
    out.xtwy += gxy[b];
    out.ytwy += gy[b];
  }
  return out;
}

MatrixXd synth_rows(const MatrixXd& X, const MatrixXd& beta, const MatrixXd& sigma_chol_lower,
                    const MixingDensity& mixing, const std::vector<std::uint64_t>& seeds) {
  if (static_cast<Index>(seeds.size()) != X.rows())
    throw std::invalid_argument("one seed per synthetic row required");
  const Index n = X.rows();
  MatrixXd Y(n, beta.cols());
  parallel_for_captured(
      n, [&](Index i) { synth_row_impl(X, beta, sigma_chol_lower, mixing, seeds[i], i, Y); });
  return Y;
}

VectorXd autocorrelations(const VectorXd& series, int max_lag) {
  const Index n = series.size();
  if (max_lag < 0 || max_lag >= n)
    throw std::invalid_argument("autocorrelation lag out of range");
  const double mean = blocked_sum(series) / static_cast<double>(n);
  const VectorXd centered = series.array() - mean;
  const double denom = blocked_sum(centered.cwiseProduct(centered));
  VectorXd rho(max_lag + 1);
#pragma omp parallel for schedule(static)
  for (int k = 0; k <= max_lag; ++k) rho(k) = autocorr_at_lag(centered, denom, k);
  return rho;
}

}  // namespace kernels

namespace reference {

VectorXd residual_quadforms(const MatrixXd& X, const MatrixXd& Y, const MatrixXd& beta,
                            const MatrixXd& sigma_chol_lower) {
  check_residual_dims(X, Y, beta, sigma_chol_lower);
  const Index n = X.rows();
  VectorXd r(n), work(Y.cols());
  for (Index i = 0; i < n; ++i) r(i) = quadform_row(X, Y, beta, sigma_chol_lower, i, work);
  return r;
}

double plain_sum(const VectorXd& values) {
  double total = 0.0;
  for (Index i = 0; i < values.size(); ++i) total += values(i);
  return total;
}

VectorXd sample_latents(const MixingDensity& mixing, const VectorXd& r,
                        const std::vector<std::uint64_t>& seeds) {
  if (static_cast<Index>(seeds.size()) != r.size())
    throw std::invalid_argument("one seed per latent draw required");
  const Index n = r.size();
  VectorXd z(n);
  for (Index i = 0; i < n; ++i) {
    rng::Stream stream(seeds[i]);
    z(i) = draw_latent(mixing, r(i), stream);
  }
  return z;
}

kernels::WeightedGram weighted_gram(const MatrixXd& X, const MatrixXd& Y, const VectorXd& z) {
  if (X.rows() != Y.rows() || X.rows() != z.size())
    throw std::invalid_argument("X, Y and z must have matching row counts");
  const Index n = X.rows(), p = X.cols(), d = Y.cols();
  kernels::WeightedGram out{MatrixXd::Zero(p, p), MatrixXd::Zero(p, d), MatrixXd::Zero(d, d)};
  for (Index i = 0; i < n; ++i) {
    const auto xi = X.row(i).transpose();
    const auto yi = Y.row(i).transpose();
    out.xtwx.noalias() += z(i) * (xi * xi.transpose());
    out.xtwy.noalias() += z(i) * (xi * yi.transpose());
    out.ytwy.noalias() += z(i) * (yi * yi.transpose());
  }
  return out;
}

MatrixXd synth_rows(const MatrixXd& X, const MatrixXd& beta, const MatrixXd& sigma_chol_lower,
                    const MixingDensity& mixing, const std::vector<std::uint64_t>& seeds) {
  if (static_cast<Index>(seeds.size()) != X.rows())
    throw std::invalid_argument("one seed per synthetic row required");
  const Index n = X.rows();
  MatrixXd Y(n, beta.cols());
  for (Index i = 0; i < n; ++i)
    synth_row_impl(X, beta, sigma_chol_lower, mixing, seeds[i], i, Y);
  return Y;
}

VectorXd autocorrelations(const VectorXd& series, int max_lag) {
  const Index n = series.size();
  if (max_lag < 0 || max_lag >= n)
    throw std::invalid_argument("autocorrelation lag out of range");
  const double mean = plain_sum(series) / static_cast<double>(n);
  const VectorXd centered = series.array() - mean;
  const double denom = plain_sum(centered.cwiseProduct(centered));
  VectorXd rho(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) rho(k) = autocorr_at_lag(centered, denom, k);
  return rho;
}

}  // namespace reference

}  // namespace smnreg
