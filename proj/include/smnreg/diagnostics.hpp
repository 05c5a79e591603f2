#pragma once

#include "smnreg/sampler.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

// MCMC output analysis.  Geometric ergodicity of the chain is what makes
// these CLT-based standard errors asymptotically valid; the diagnostics
// themselves never certify convergence.

namespace smnreg {

// Batch-means standard error of the series mean.  With batch count a_b and
// batch size b = floor(length / a_b), the batches tile the first a_b * b
// points and
//   SE^2 = sum_k (ybar_k - ybar)^2 * b / ((a_b - 1) * length),
// where ybar is the mean of the batched points.  Requires length >= 2 a_b.
double batch_means_se(const Eigen::VectorXd& series, int batch_count);

// Autocorrelations rho_0..rho_max_lag (biased estimator).  Requires
// length >= 10.  A constant series reports rho_0 = 1 and 0 elsewhere.
Eigen::VectorXd acf(const Eigen::VectorXd& series, int max_lag);

// Effective sample size length / (1 + 2 sum rho_k), with the sum truncated
// before the first adjacent pair rho_{2j+1} + rho_{2j+2} that is negative.
// Always in (0, length].
double ess(const Eigen::VectorXd& series);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;    // batch-means standard error; NaN when not defined
  double ess = 0.0;   // NaN when the series is too short
  std::vector<double> acf;
  bool se_defined = false;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
  std::vector<int> acf_lags;
  long length = 0;
};

// Per-parameter summary over beta entries (row-major) followed by the
// lower triangle of sigma (column-major), matching the trace file layout.
// The batch count shrinks to floor(length/2) on short traces; with fewer
// than 4 states the standard error is flagged undefined.
SummaryTable summarize(const ChainTrace& trace, int batch_count = 30,
                       const std::vector<int>& lags = {1, 5, 10});

}  // namespace smnreg
