// Kernel benchmark: serial reference vs OpenMP implementations.
//
//   bench_kernels [n] [reps]
//
// n is the number of observations for the row-parallel kernels (default
// 200000), reps the number of timed repetitions (default 5; the best time
// is reported).

#include "smnreg/kernels.hpp"
#include "smnreg/model.hpp"
#include "smnreg/sampler.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace smnreg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename Fn>
double best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    fn();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

volatile double sink = 0.0;

void report(const char* name, double serial, double parallel) {
  std::printf("%-22s serial %10.4f ms   openmp %10.4f ms   speedup %5.2fx\n", name,
              1e3 * serial, 1e3 * parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const Eigen::Index n = argc > 1 ? std::atol(argv[1]) : 200000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
  const int p = 8, d = 4;

#ifdef _OPENMP
  std::printf("threads: %d, n = %ld, reps = %d\n", omp_get_max_threads(),
              static_cast<long>(n), reps);
#else
  std::printf("compiled without OpenMP, n = %ld, reps = %d\n", static_cast<long>(n), reps);
#endif

  rng::Stream stream(1);
  MatrixXd X(n, p), Y(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) X(i, j) = stream.normal();
    for (int j = 0; j < d; ++j) Y(i, j) = stream.normal();
  }
  MatrixXd beta = MatrixXd::Ones(p, d) * 0.1;
  MatrixXd sigma_l = MatrixXd::Identity(d, d);
  VectorXd z = VectorXd::NullaryExpr(n, [&](Eigen::Index) { return 0.5 + stream.uniform(); });
  std::vector<std::uint64_t> seeds(n);
  for (Eigen::Index i = 0; i < n; ++i) seeds[i] = rng::derive_seed(9, {std::uint64_t(i)});
  const MixingDensity mixing = MixingDensity::gamma_nu_half(5.0, d);

  report("residual quadforms",
         best_of(reps, [&] { sink = sink + reference::residual_quadforms(X, Y, beta, sigma_l)(0); }),
         best_of(reps, [&] { sink = sink + kernels::residual_quadforms(X, Y, beta, sigma_l)(0); }));

  const VectorXd r = kernels::residual_quadforms(X, Y, beta, sigma_l);
  report("latent draws",
         best_of(reps, [&] { sink = sink + reference::sample_latents(mixing, r, seeds)(0); }),
         best_of(reps, [&] { sink = sink + kernels::sample_latents(mixing, r, seeds)(0); }));

  report("weighted gram",
         best_of(reps, [&] { sink = sink + reference::weighted_gram(X, Y, z).xtwx(0, 0); }),
         best_of(reps, [&] { sink = sink + kernels::weighted_gram(X, Y, z).xtwx(0, 0); }));

  report("synthetic rows",
         best_of(reps, [&] { sink = sink + reference::synth_rows(X, beta, sigma_l, mixing, seeds)(0, 0); }),
         best_of(reps, [&] { sink = sink + kernels::synth_rows(X, beta, sigma_l, mixing, seeds)(0, 0); }));

  report("reduction sum", best_of(reps, [&] { sink = sink + reference::plain_sum(r); }),
         best_of(reps, [&] { sink = sink + kernels::blocked_sum(r); }));

  VectorXd series = VectorXd::NullaryExpr(100000, [&](Eigen::Index) { return stream.normal(); });
  report("autocorrelations (512 lags)",
         best_of(reps, [&] { sink = sink + reference::autocorrelations(series, 512)(1); }),
         best_of(reps, [&] { sink = sink + kernels::autocorrelations(series, 512)(1); }));

  // one full DA iteration at a work size closer to real use
  {
    const Eigen::Index n_small = std::min<Eigen::Index>(n, 20000);
    const Dataset data(X.topRows(n_small), Y.topRows(n_small));
    const PriorSpec prior = PriorSpec::standard_noninformative(d);
    const ChainState init = ols_init(data);
    rng::Stream chain_stream(11);
    const double per_step = best_of(reps, [&] {
      auto [next, zz] = da_step(init, data, prior, mixing, chain_stream);
      sink = sink + next.beta(0, 0);
    });
    std::printf("%-22s %10.4f ms per iteration (n = %ld)\n", "da_step", 1e3 * per_step,
                static_cast<long>(n_small));
  }
  return 0;
}
