// Acceptance suite: oracle- and property-based end checks of the sampler,
// the certificate quantities, and the CLI pipeline.  Each criterion prints
// one PASS/FAIL line; the exit status is the number of failures.

#include "smnreg/cli.hpp"
#include "smnreg/diagnostics.hpp"
#include "smnreg/ergodicity.hpp"
#include "smnreg/io.hpp"
#include "smnreg/model.hpp"
#include "smnreg/sampler.hpp"

#include "stat_utils.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace smnreg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

// ---- criterion 1: gamma-rule grid against nu > n - p + 2 ------------------

Outcome criterion_gamma_rule_grid() {
  const double t0 = now_seconds();
  int cases = 0, agree = 0;
  for (int n = 4; n <= 32; n += 2) {
    for (int p = 1; p <= 3; ++p) {
      for (int d = 1; d <= 3; ++d) {
        const double a = 0.5 * (d + 1);
        for (double nu = 0.5; nu <= 40.0; nu += 1.25) {
          ++cases;
          const bool want = nu > n - p + 2.0;
          const auto verdict = gamma_rule(nu, Dims{n, p, d}, a);
          if ((verdict.status == GEVerdict::Status::Guaranteed) == want) ++agree;
        }
      }
    }
  }
  const double elapsed = now_seconds() - t0;
  Outcome out;
  out.pass = (agree == cases) && elapsed < 1.0;
  out.detail = std::to_string(agree) + "/" + std::to_string(cases) + " agree, " +
               fmt(elapsed) + "s";
  return out;
}

// ---- criterion 2: closed-form moment-integral ratio ------------------------

Outcome criterion_ratio_closed_form() {
  double worst = 0.0;
  for (double nu : {3.0, 5.0, 10.0}) {
    for (int d : {1, 2, 4}) {
      const MixingDensity mixing = MixingDensity::gamma_nu_half(nu, d);
      for (double s : {0.0, 1.0, 10.0, 100.0}) {
        const double ratio = moment_integral(mixing, d - 2, s) / moment_integral(mixing, d, s);
        const double want = (s + nu) / (nu + d - 2.0);
        worst = std::max(worst, std::abs(ratio / want - 1.0));
      }
    }
  }
  return {worst < 1e-8, "max relative error " + fmt(worst)};
}

// ---- criterion 3: conjugate-posterior oracle under the point mass ----------

Outcome criterion_conjugate_oracle() {
  const double t0 = now_seconds();
  const int n = 50, p = 3, d = 2;
  const MatrixXd X = test_util::random_design(n, p, 61);
  MatrixXd beta_true(p, d);
  beta_true << 1.0, -0.5, 0.3, 0.8, -1.2, 0.4;
  const Dataset data = generate_synthetic(beta_true, test_util::random_spd(d, 62), X,
                                          MixingDensity::degenerate_one(d), 63);
  const PriorSpec prior = PriorSpec::standard_noninformative(d);  // a = 1.5
  const double m = n - p + 2.0 * prior.a - d - 1.0;               // 47

  const MatrixXd ols = test_util::ols_coefficients(data);
  const MatrixXd resid = data.Y() - data.X() * ols;
  const MatrixXd sigma_oracle = resid.transpose() * resid / (m - d - 1.0);

  const long iters = 50000;
  const ChainTrace trace = run_chain(ols_init(data), iters, 0, 1, data, prior,
                                     MixingDensity::degenerate_one(d), 64);

  double worst = 0.0;
  auto check_series = [&](std::function<double(const ChainState&)> get, double want) {
    VectorXd series(iters);
    for (long t = 0; t < iters; ++t) series(t) = get(trace.states[t]);
    const double mean = series.mean();
    const double se = batch_means_se(series, 30);
    worst = std::max(worst, std::abs(mean - want) / se);
  };
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < d; ++j)
      check_series([i, j](const ChainState& s) { return s.beta(i, j); }, ols(i, j));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      check_series([i, j](const ChainState& s) { return s.sigma(i, j); }, sigma_oracle(i, j));

  const double elapsed = now_seconds() - t0;
  Outcome out;
  out.pass = worst <= 3.0 && elapsed < 60.0;
  out.detail = "max |mean - oracle| = " + fmt(worst) + " batch-means SEs, " + fmt(elapsed) + "s";
  return out;
}

// ---- criterion 4: one-step drift inequality at random states ---------------

Outcome criterion_drift_inequality() {
  const int n = 10, p = 2, d = 2;
  const double nu = 12.0;  // guaranteed: nu > n - p + 2a - d + 1 = 10
  const MatrixXd X = test_util::random_design(n, p, 71);
  MatrixXd beta_true = MatrixXd::Ones(p, d);
  const Dataset data = generate_synthetic(beta_true, test_util::random_spd(d, 72), X,
                                          MixingDensity::gamma_nu_half(nu, d), 73);
  const PriorSpec prior = PriorSpec::standard_noninformative(d);
  const MixingDensity mixing = MixingDensity::gamma_nu_half(nu, d);
  const DriftParams params =
      drift_params(mixing, Dims{n, p, d}, prior.a, 1.0 / (nu + d - 2.0));
  if (!params.qualifies) return {false, "certificate does not qualify"};

  rng::Stream stream(74);
  rng::Stream state_gen(75);
  int passed = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 10; ++trial) {
    ChainState state;
    state.beta = MatrixXd::NullaryExpr(
        p, d, [&](Eigen::Index, Eigen::Index) { return 2.0 * state_gen.normal(); });
    state.sigma = test_util::random_spd(d, 760 + trial);
    const DriftCheckReport report =
        empirical_drift_check(state, data, prior, mixing, params, 2000, stream);
    if (report.pass) ++passed;
    worst_margin = std::min(
        worst_margin, (report.bound + 3.0 * report.std_error - report.estimate) /
                          std::max(report.bound, 1e-12));
  }
  Outcome out;
  out.pass = passed == 10;
  out.detail = std::to_string(passed) + "/10 states, slack margin >= " + fmt(worst_margin);
  return out;
}

// ---- criterion 5: minorization epsilon closed form --------------------------

Outcome criterion_minorization_epsilon() {
  const double nu = 2.0;
  double worst = 0.0;
  bool monotone = true;
  for (int d : {1, 2, 3}) {
    const MixingDensity mixing = MixingDensity::gamma_nu_half(nu, d);
    for (int n : {1, 5, 20}) {
      double prev = 1.0 + 1e-15;
      for (double l : {0.5, 1.0, 2.0}) {
        const double eps = minorization_epsilon(mixing, l, n);
        const double want = std::pow(nu / (l + nu), 0.5 * n * (nu + d));
        worst = std::max(worst, std::abs(eps / want - 1.0));
        if (eps > prev) monotone = false;
        prev = eps;
      }
    }
  }
  return {worst < 1e-8 && monotone,
          "max relative error " + fmt(worst) + (monotone ? ", monotone" : ", NOT monotone")};
}

// ---- criterion 6: dimension-reduction ratio identity ------------------------

Outcome criterion_star_identity() {
  auto gamma_pdf = [](double nu, double u) {
    const double h = 0.5 * nu;
    return u > 0.0
               ? std::exp(h * std::log(h) - std::lgamma(h) + (h - 1.0) * std::log(u) - h * u)
               : 0.0;
  };
  double worst = 0.0;
  const double nu = 5.0;
  for (int d : {2, 3}) {
    const auto base = MixingDensity::user_defined(
        [nu, gamma_pdf](double u) { return gamma_pdf(nu, u); },
        OriginBehavior::polynomial(0.5 * nu - 1.0), d);
    const MixingDensity star = star_transform(base);
    for (double s : {0.0, 1.0, 10.0}) {
      const double lhs = moment_integral(star, -1, s) / moment_integral(star, 1, s);
      const double rhs =
          moment_integral(base, d - 2, s) / moment_integral(base, d, s);
      worst = std::max(worst, std::abs(lhs / rhs - 1.0));
    }
  }
  return {worst < 1e-6, "max relative mismatch " + fmt(worst)};
}

// ---- criterion 7: appendix distribution moments ------------------------------

Outcome criterion_appendix_moments() {
  const int reps = 100000;
  rng::Stream stream(81);

  // inverse Wishart: E[W^{-1}] = m Theta
  const double m = 8.0;
  MatrixXd theta(2, 2);
  theta << 2.0, 0.3, 0.3, 1.0;
  std::vector<std::vector<double>> winv(4, std::vector<double>(reps));
  for (int r = 0; r < reps; ++r) {
    const MatrixXd w = sample_inverse_wishart(m, theta, stream);
    const MatrixXd inv = w.inverse();
    winv[0][r] = inv(0, 0);
    winv[1][r] = inv(0, 1);
    winv[2][r] = inv(1, 0);
    winv[3][r] = inv(1, 1);
  }
  double worst = 0.0;
  const double want_iw[4] = {m * theta(0, 0), m * theta(0, 1), m * theta(1, 0), m * theta(1, 1)};
  for (int k = 0; k < 4; ++k) {
    const double dev = std::abs(test_util::mean(winv[k]) - want_iw[k]);
    worst = std::max(worst, dev / test_util::std_error(winv[k]));
  }

  // matrix normal: cov(vec Z) = B (x) A
  MatrixXd A(2, 2), B(2, 2);
  A << 2.0, 0.7, 0.7, 1.0;
  B << 1.5, -0.4, -0.4, 0.8;
  MatrixXd kron(4, 4);
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj) kron.block(2 * bi, 2 * bj, 2, 2) = B(bi, bj) * A;
  MatrixXd acc = MatrixXd::Zero(4, 4);
  for (int r = 0; r < reps; ++r) {
    const MatrixXd z = sample_matrix_normal(MatrixXd::Zero(2, 2), A, B, stream);
    VectorXd v(4);
    v << z(0, 0), z(1, 0), z(0, 1), z(1, 1);
    acc += v * v.transpose();
  }
  const MatrixXd cov = acc / reps;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double se =
          std::sqrt((kron(i, i) * kron(j, j) + kron(i, j) * kron(i, j)) / reps);
      worst = std::max(worst, std::abs(cov(i, j) - kron(i, j)) / se);
    }

  return {worst <= 3.0, "max deviation " + fmt(worst) + " Monte Carlo SEs"};
}

// ---- criterion 8: psi sampler distributional test ----------------------------

Outcome criterion_psi_ks() {
  struct Case {
    double nu;
    int d;
    double s;
  };
  const Case cases[] = {{2.0, 2, 2.0}, {4.0, 1, 0.0}, {6.0, 3, 5.0}};
  std::string detail;
  bool all_pass = true;
  rng::Stream stream(91);
  for (const auto& c : cases) {
    const PsiDensity psi = make_psi(MixingDensity::gamma_nu_half(c.nu, c.d), c.s);
    const int n = 100000;
    std::vector<double> draws(n);
    for (auto& z : draws) z = sample_psi(psi, stream);
    const double shape = 0.5 * (c.nu + c.d), rate = 0.5 * (c.s + c.nu);
    const double d_stat = test_util::ks_statistic(
        draws, [&](double x) { return test_util::gamma_cdf(x, shape, rate); });
    const double critical = 1.6276 / std::sqrt(static_cast<double>(n));
    if (d_stat > critical) all_pass = false;
    if (!detail.empty()) detail += ", ";
    detail += "D*sqrt(n) = " + fmt(d_stat * std::sqrt(double(n)));
  }
  return {all_pass, detail + " (1% critical 1.6276)"};
}

// ---- criterion 9: end-to-end recovery through the CLI pipeline ---------------

Outcome criterion_end_to_end() {
  namespace fs = std::filesystem;
  const double t0 = now_seconds();
  const fs::path dir =
      fs::temp_directory_path() / ("smnreg_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  std::ostringstream out, err;

  RunConfig synth;
  synth.n = 100;
  synth.p = 2;
  synth.d = 2;
  synth.mixing_spec = "gamma:5";
  synth.seed = 905;
  synth.out_dir = (dir / "syn").string();
  if (cmd_synth(synth, out, err) != kExitOk) return {false, "synth failed: " + err.str()};

  RunConfig run;
  run.x_path = (dir / "syn/x.csv").string();
  run.y_path = (dir / "syn/y.csv").string();
  run.mixing_spec = "gamma:5";
  run.iters = 10000;
  run.seed = 906;
  run.out_dir = (dir / "run").string();
  if (cmd_run(run, out, err) != kExitOk) return {false, "run failed: " + err.str()};

  std::ostringstream sum_out;
  if (cmd_summarize((dir / "run/trace_0.csv").string(), "", sum_out, err) != kExitOk)
    return {false, "summarize failed: " + err.str()};

  const MatrixXd beta_true = load_matrix_csv((dir / "syn/beta_true.csv").string());
  const ChainTrace trace = read_trace_csv((dir / "run/trace_0.csv").string());
  const SummaryTable table = summarize(trace);

  double worst_se_units = 0.0, worst_sd_units = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const std::string name =
          "beta_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
      for (const auto& row : table.rows)
        if (row.name == name) {
          worst_se_units =
              std::max(worst_se_units, std::abs(row.mean - beta_true(i, j)) / row.se);
          worst_sd_units =
              std::max(worst_sd_units, std::abs(row.mean - beta_true(i, j)) / row.sd);
        }
    }
  const double elapsed = now_seconds() - t0;
  fs::remove_all(dir);

  Outcome result;
  result.pass = worst_se_units <= 3.0 && elapsed < 30.0;
  result.detail = "max |mean - true| = " + fmt(worst_se_units) +
                  " batch-means SEs (informational: " + fmt(worst_sd_units) +
                  " posterior sds), " + fmt(elapsed) + "s";
  return result;
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"gamma-mixing rule reproduces nu > n-p+2 on a grid", criterion_gamma_rule_grid},
      {"moment-integral ratio matches (s+nu)/(nu+d-2)", criterion_ratio_closed_form},
      {"point-mass mixing recovers the conjugate posterior", criterion_conjugate_oracle},
      {"one-step drift inequality holds at random states", criterion_drift_inequality},
      {"minorization epsilon matches (nu/(l+nu))^{n(nu+d)/2}", criterion_minorization_epsilon},
      {"star transform satisfies the ratio identity", criterion_star_identity},
      {"inverse Wishart and matrix normal moments", criterion_appendix_moments},
      {"psi draws pass KS against the conjugate gamma law", criterion_psi_ks},
      {"synth -> run -> summarize recovers the true coefficients", criterion_end_to_end},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const double t0 = now_seconds();
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = now_seconds() - t0;
    if (!outcome.pass) ++failures;
    std::printf("%s  criterion %zu: %s  --  %s  [%.2fs]\n",
                outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].title,
                outcome.detail.c_str(), elapsed);
  }
  if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
