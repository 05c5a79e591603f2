#include "smnreg/model.hpp"

#include "smnreg/kernels.hpp"
#include "smnreg/quadrature.hpp"

#include <cmath>

namespace smnreg {

namespace {
constexpr double kRankTolerance = 1e-10;
constexpr double kTwoPi = 6.283185307179586476925287;
}  // namespace

Dataset::Dataset(Eigen::MatrixXd X, Eigen::MatrixXd Y) : X_(std::move(X)), Y_(std::move(Y)) {
  if (X_.rows() != Y_.rows())
    throw std::invalid_argument("dimension mismatch: X and Y must have the same row count");
  if (X_.rows() < 1 || X_.cols() < 1 || Y_.cols() < 1)
    throw std::invalid_argument("dataset requires n >= 1, p >= 1, d >= 1");
}

PriorSpec::PriorSpec(double a_in) : a(a_in) {
  if (!std::isfinite(a)) throw std::invalid_argument("prior exponent a must be finite");
}

PriorSpec PriorSpec::standard_noninformative(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  return PriorSpec(0.5 * (d + 1));
}

ProprietyReport validate_propriety(const Dataset& data, const PriorSpec& prior) {
  const int n = data.n(), p = data.p(), d = data.d();

  Eigen::MatrixXd lambda(n, p + d);
  lambda << data.X(), data.Y();

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(lambda);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? kRankTolerance * sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;

  ProprietyReport report;
  report.rank_of_lambda = rank;
  report.required_rank = p + d;
  report.rank_ok = (rank == p + d);
  report.slack = n - p - 2.0 * d + 2.0 * prior.a;
  report.sample_size_ok = report.slack > 0.0;
  report.tolerance = kRankTolerance;
  return report;
}

Dataset generate_synthetic(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& sigma,
                           const Eigen::MatrixXd& X, const MixingDensity& mixing,
                           std::uint64_t seed) {
  const Eigen::Index p = X.cols(), d = beta.cols();
  if (beta.rows() != p) throw std::invalid_argument("beta must be p x d");
  if (sigma.rows() != d || sigma.cols() != d) throw std::invalid_argument("sigma must be d x d");
  if (mixing.dim() != d) throw std::invalid_argument("mixing dimension must equal d");
  if (!mixing.has_h_sampler())
    throw std::runtime_error("mixing density is not samplable (no h sampler)");

  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sigma must be symmetric positive definite");

  rng::Stream root(seed);
  std::vector<std::uint64_t> seeds(X.rows());
  for (auto& s : seeds) s = root.next_u64();

  Eigen::MatrixXd Y =
      kernels::synth_rows(X, beta, Eigen::MatrixXd(llt.matrixL()), mixing, seeds);
  return Dataset(X, std::move(Y));
}

double mixture_error_density(const Eigen::VectorXd& eps, const MixingDensity& mixing) {
  const int d = mixing.dim();
  if (eps.size() != d)
    throw std::invalid_argument("error vector length must equal the mixing dimension");
  const double q = eps.squaredNorm();
  const double norm_const = std::pow(kTwoPi, -0.5 * d);

  if (mixing.family() == MixingDensity::Family::DegenerateOne)
    return norm_const * std::exp(-0.5 * q);

  if (!mixing.has_pdf())
    throw std::runtime_error("mixture density requires a density evaluator");

  // Integrability: condition-M style control of the tail when the
  // exponential tilt vanishes (q = 0).
  if (q == 0.0) {
    const CheckOutcome m = check_condition_m(mixing);
    if (m == CheckOutcome::No)
      throw DivergentIntegral("mixture density integral diverges: condition on u^{d/2} h fails");
    if (m == CheckOutcome::Unknown)
      throw std::runtime_error("mixture density tail integrability could not be established");
  }
  return norm_const * moment_integral_numeric(mixing, d, q);
}

}  // namespace smnreg
