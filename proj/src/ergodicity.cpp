#include "smnreg/ergodicity.hpp"

#include "smnreg/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>

namespace smnreg {

namespace {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

void check_dims(const Dims& dims) {
  if (dims.n < 1 || dims.p < 1 || dims.d < 1)
    throw std::invalid_argument("dimensions must satisfy n, p, d >= 1");
}

}  // namespace

std::string to_string(GEVerdict::Status status) {
  return status == GEVerdict::Status::Guaranteed ? "guaranteed" : "not_guaranteed_by_theorem";
}

std::string to_string(GEVerdict::Clause clause) {
  switch (clause) {
    case GEVerdict::Clause::ZeroNearOrigin:
      return "zero_near_origin";
    case GEVerdict::Clause::FasterThanPolynomial:
      return "faster_than_polynomial";
    case GEVerdict::Clause::PolynomialPowerSufficient:
      return "polynomial_power_sufficient";
    case GEVerdict::Clause::None:
      return "none";
  }
  return "?";
}

GEVerdict classify_ge(const OriginBehavior& origin, const Dims& dims, double a) {
  check_dims(dims);
  GEVerdict verdict;
  switch (origin.kind) {
    case OriginBehavior::Kind::ZeroNearOrigin:
      verdict.status = GEVerdict::Status::Guaranteed;
      verdict.clause = GEVerdict::Clause::ZeroNearOrigin;
      verdict.detail = "mixing density vanishes on (0, " + format_double(origin.delta) + ")";
      return verdict;
    case OriginBehavior::Kind::FasterThanPolynomial:
      verdict.status = GEVerdict::Status::Guaranteed;
      verdict.clause = GEVerdict::Clause::FasterThanPolynomial;
      verdict.detail = "mixing density decays faster than every polynomial at the origin";
      return verdict;
    case OriginBehavior::Kind::PolynomialAtOrigin: {
      const double threshold = 0.5 * (dims.n - dims.p + 2.0 * a - dims.d - 1.0);
      verdict.power = origin.c;
      verdict.threshold = threshold;
      if (origin.c > threshold) {
        verdict.status = GEVerdict::Status::Guaranteed;
        verdict.clause = GEVerdict::Clause::PolynomialPowerSufficient;
        verdict.detail = "origin power c = " + format_double(origin.c) +
                         " exceeds (n-p+2a-d-1)/2 = " + format_double(threshold);
      } else {
        verdict.status = GEVerdict::Status::NotGuaranteedByTheorem;
        verdict.clause = GEVerdict::Clause::None;
        verdict.detail = "origin power c = " + format_double(origin.c) +
                         " does not exceed (n-p+2a-d-1)/2 = " + format_double(threshold) +
                         "; the sufficient condition does not apply (no claim of non-ergodicity)";
      }
      return verdict;
    }
  }
  throw std::logic_error("unreachable origin kind");
}

GEVerdict gamma_rule(double nu, const Dims& dims, double a) {
  check_dims(dims);
  if (!(nu > 0.0)) throw std::invalid_argument("gamma rule requires nu > 0");
  const double threshold = dims.n - dims.p + 2.0 * a - dims.d + 1.0;
  GEVerdict verdict;
  verdict.power = 0.5 * nu - 1.0;
  verdict.threshold = threshold;
  if (nu > threshold) {
    verdict.status = GEVerdict::Status::Guaranteed;
    verdict.clause = GEVerdict::Clause::PolynomialPowerSufficient;
    verdict.detail = "gamma mixing with nu = " + format_double(nu) +
                     " exceeds n-p+2a-d+1 = " + format_double(threshold);
  } else {
    verdict.status = GEVerdict::Status::NotGuaranteedByTheorem;
    verdict.clause = GEVerdict::Clause::None;
    verdict.detail = "gamma mixing with nu = " + format_double(nu) +
                     " does not exceed n-p+2a-d+1 = " + format_double(threshold) +
                     "; the sufficient condition does not apply (no claim of non-ergodicity)";
  }
  return verdict;
}

double drift_function(const ChainState& state, const Dataset& data) {
  const Eigen::LLT<Eigen::MatrixXd> llt(state.sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("drift function requires a symmetric positive definite sigma");
  const Eigen::VectorXd r = kernels::residual_quadforms(
      data.X(), data.Y(), state.beta, Eigen::MatrixXd(llt.matrixL()));
  return kernels::blocked_sum(r);
}

std::vector<double> default_s_grid() {
  return {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0, 100.0};
}

DriftParams drift_params(const MixingDensity& mixing, const Dims& dims, double a, double lambda,
                         const std::vector<double>& s_grid) {
  check_dims(dims);
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("drift parameter lambda must be finite and >= 0");

  const RatioBoundReport ratio = ratio_bound_check(mixing, lambda, s_grid);
  const double factor = dims.n - dims.p + 2.0 * a - 1.0;

  DriftParams params;
  params.lambda = lambda;
  params.L = ratio.max_residual;
  params.lambda_prime = lambda * factor;
  params.L_prime = factor * dims.n * ratio.max_residual;
  params.qualifies = params.lambda_prime < 1.0;
  params.s_grid = s_grid;
  const int n = dims.n;
  params.epsilon_of_l = [mixing, n](double l) { return minorization_epsilon(mixing, l, n); };
  return params;
}

double minorization_epsilon(const MixingDensity& mixing, double l, int n) {
  if (!(l > 0.0) || !std::isfinite(l))
    throw std::invalid_argument("minorization radius l must be positive");
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  const int d = mixing.dim();
  const double log_ratio =
      std::log(moment_integral(mixing, d, l)) - std::log(moment_integral(mixing, d, 0.0));
  const double eps = std::exp(static_cast<double>(n) * log_ratio);
  return std::min(eps, 1.0);
}

DriftCheckReport empirical_drift_check(const ChainState& state, const Dataset& data,
                                       const PriorSpec& prior, const MixingDensity& mixing,
                                       const DriftParams& params, int reps,
                                       rng::Stream& stream) {
  if (reps < 2) throw std::invalid_argument("drift check requires reps >= 2");
  if (!params.qualifies)
    throw std::invalid_argument("drift parameters do not qualify (lambda' >= 1)");

  DriftCheckReport report;
  report.v_state = drift_function(state, data);
  report.lambda_prime = params.lambda_prime;
  report.L_prime = params.L_prime;
  report.reps = reps;
  report.bound = params.lambda_prime * report.v_state + params.L_prime;

  std::vector<std::uint64_t> seeds(reps);
  for (auto& s : seeds) s = stream.next_u64();

  Eigen::VectorXd v_next(reps);
  std::exception_ptr error = nullptr;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(static)
  for (int rep = 0; rep < reps; ++rep) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      rng::Stream sub(seeds[rep]);
      const auto [next, z] = da_step(state, data, prior, mixing, sub);
      v_next(rep) = drift_function(next, data);
    } catch (...) {
#pragma omp critical(smnreg_drift_error)
      {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);

  report.estimate = kernels::blocked_sum(v_next) / reps;
  const Eigen::VectorXd dev = v_next.array() - report.estimate;
  const double var = kernels::blocked_sum(dev.cwiseProduct(dev)) / (reps - 1);
  report.std_error = std::sqrt(var / reps);
  report.pass = report.estimate <= report.bound + 3.0 * report.std_error;
  return report;
}

}  // namespace smnreg
