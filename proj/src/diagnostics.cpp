#include "smnreg/diagnostics.hpp"

#include "smnreg/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace smnreg {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Truncated positive-sequence sum of autocorrelations: adjacent pairs
// (rho_1 + rho_2), (rho_3 + rho_4), ... are added until the first negative
// pair sum.  Lags are computed in chunks so long series do not pay for
// autocorrelations that the truncation never reaches.
double truncated_acf_sum(const VectorXd& series) {
  const Index n = series.size();
  const int max_lag = static_cast<int>(n - 2);
  int have = 0;
  VectorXd rho;
  double sum = 0.0;
  for (int k = 1; k + 1 <= max_lag;) {
    if (k + 1 > have) {
      have = std::min(max_lag, std::max(128, 2 * have));
      rho = kernels::autocorrelations(series, have);
    }
    const double pair = rho(k) + rho(k + 1);
    if (pair < 0.0) return sum;
    sum += pair;
    k += 2;
  }
  return sum;
}

}  // namespace

double batch_means_se(const VectorXd& series, int batch_count) {
  const Index n = series.size();
  if (batch_count < 2) throw std::invalid_argument("batch count must be >= 2");
  if (n < 2 * static_cast<Index>(batch_count))
    throw std::invalid_argument("series too short for the requested batch count");

  const Index b = n / batch_count;
  const Index used = b * batch_count;
  const double grand = kernels::blocked_sum(series.head(used)) / static_cast<double>(used);

  double ss = 0.0;
  for (int k = 0; k < batch_count; ++k) {
    const double bm = series.segment(k * b, b).mean();
    ss += (bm - grand) * (bm - grand);
  }
  return std::sqrt(ss * static_cast<double>(b) /
                   ((batch_count - 1) * static_cast<double>(n)));
}

VectorXd acf(const VectorXd& series, int max_lag) {
  if (series.size() < 10) throw std::invalid_argument("series too short for autocorrelations");
  return kernels::autocorrelations(series, max_lag);
}

double ess(const VectorXd& series) {
  const Index n = series.size();
  if (n < 10) throw std::invalid_argument("series too short for effective sample size");
  const double sum = truncated_acf_sum(series);
  return static_cast<double>(n) / (1.0 + 2.0 * sum);
}

SummaryTable summarize(const ChainTrace& trace, int batch_count, const std::vector<int>& lags) {
  const long n_states = static_cast<long>(trace.states.size());
  if (n_states == 0) throw std::invalid_argument("empty trace");
  const Index p = trace.states.front().beta.rows();
  const Index d = trace.states.front().beta.cols();

  // Parameter layout mirrors the trace file: beta row-major, then the
  // lower triangle of sigma column-major.
  std::vector<std::string> names;
  std::vector<std::function<double(const ChainState&)>> getters;
  char buf[64];
  for (Index r = 0; r < p; ++r)
    for (Index c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof(buf), "beta_%ld_%ld", static_cast<long>(r + 1),
                    static_cast<long>(c + 1));
      names.emplace_back(buf);
      getters.emplace_back([r, c](const ChainState& s) { return s.beta(r, c); });
    }
  for (Index c = 0; c < d; ++c)
    for (Index r = c; r < d; ++r) {
      std::snprintf(buf, sizeof(buf), "sigma_%ld_%ld", static_cast<long>(r + 1),
                    static_cast<long>(c + 1));
      names.emplace_back(buf);
      getters.emplace_back([r, c](const ChainState& s) { return s.sigma(r, c); });
    }

  SummaryTable table;
  table.acf_lags = lags;
  table.length = n_states;
  const int effective_batches = n_states >= 2L * batch_count
                                    ? batch_count
                                    : static_cast<int>(n_states / 2);

  for (std::size_t j = 0; j < names.size(); ++j) {
    VectorXd series(n_states);
    for (long t = 0; t < n_states; ++t) series(t) = getters[j](trace.states[t]);

    SummaryRow row;
    row.name = names[j];
    row.mean = kernels::blocked_sum(series) / static_cast<double>(n_states);
    if (n_states > 1) {
      const VectorXd dev = series.array() - row.mean;
      row.sd = std::sqrt(kernels::blocked_sum(dev.cwiseProduct(dev)) / (n_states - 1));
    } else {
      row.sd = kNaN;
    }
    if (effective_batches >= 2) {
      row.se = batch_means_se(series, effective_batches);
      row.se_defined = true;
    } else {
      row.se = kNaN;
      row.se_defined = false;
    }
    row.ess = n_states >= 10 ? ess(series) : kNaN;
    int max_req = 0;
    for (int lag : lags)
      if (lag >= 1 && lag < n_states) max_req = std::max(max_req, lag);
    VectorXd rho;
    if (max_req > 0 && n_states >= 10) rho = kernels::autocorrelations(series, max_req);
    for (int lag : lags) {
      if (lag >= 1 && lag <= max_req && rho.size() > lag)
        row.acf.push_back(rho(lag));
      else
        row.acf.push_back(kNaN);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace smnreg
