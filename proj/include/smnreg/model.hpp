#pragma once

#include "smnreg/mixing.hpp"

#include <Eigen/Dense>

#include <cstdint>

// Multivariate linear regression with scale-mixture-of-normals errors:
// row i of Y is y_i = beta^T x_i + Sigma^{1/2} eps_i, where the errors are
// normal scale mixtures N(0, I_d / u) averaged over u ~ h.  The prior on
// (beta, Sigma) is improper, proportional to |Sigma|^{-a} on the SPD cone.

namespace smnreg {

class Dataset {
 public:
  Dataset(Eigen::MatrixXd X, Eigen::MatrixXd Y);

  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::MatrixXd& Y() const { return Y_; }
  int n() const { return static_cast<int>(X_.rows()); }
  int p() const { return static_cast<int>(X_.cols()); }
  int d() const { return static_cast<int>(Y_.cols()); }

 private:
  Eigen::MatrixXd X_;
  Eigen::MatrixXd Y_;
};

struct PriorSpec {
  double a = 0.0;

  explicit PriorSpec(double a_in);

  // a = (d+1)/2, the standard non-informative choice for multivariate
  // location-scale problems.
  static PriorSpec standard_noninformative(int d);
};

// Necessary conditions for posterior propriety:
//   rank condition:        rank([X : Y]) = p + d
//   sample-size condition: n > p + 2d - 2a  (slack = n - p - 2d + 2a > 0)
// These are necessary, not sufficient; the report never claims propriety.
struct ProprietyReport {
  bool rank_ok = false;
  bool sample_size_ok = false;
  int rank_of_lambda = 0;
  int required_rank = 0;
  double slack = 0.0;
  double tolerance = 0.0;

  bool ok() const { return rank_ok && sample_size_ok; }
};

// Rank computed from singular values of [X : Y]; values below
// 1e-10 x largest singular value count as zero.
ProprietyReport validate_propriety(const Dataset& data, const PriorSpec& prior);

// Draws Y from the model at fixed (beta, Sigma) and design X.
// Deterministic given the seed; row i uses its own substream (scale first,
// then d normal coordinates).  Sigma^{1/2} is the lower Cholesky factor.
Dataset generate_synthetic(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& sigma,
                           const Eigen::MatrixXd& X, const MixingDensity& mixing,
                           std::uint64_t seed);

// Error density f_H(eps) = integral u^{d/2} (2 pi)^{-d/2} e^{-u |eps|^2/2} h(u) du,
// evaluated by quadrature over the mixing scale (closed form for the
// degenerate point mass, where the mixture collapses to a standard normal).
double mixture_error_density(const Eigen::VectorXd& eps, const MixingDensity& mixing);

}  // namespace smnreg
