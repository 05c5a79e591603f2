#include "smnreg/kernels.hpp"

#include "stat_utils.hpp"

#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <vector>

using namespace smnreg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Instance {
  MatrixXd X, Y, beta, sigma_l;
  VectorXd z;
  std::vector<std::uint64_t> seeds;
};

Instance make_instance(int n, int p, int d, std::uint64_t seed) {
  Instance inst;
  inst.X = test_util::random_design(n, p, seed);
  inst.Y = test_util::random_design(n, d, seed + 1);
  rng::Stream stream(seed + 2);
  inst.beta = MatrixXd::NullaryExpr(p, d, [&](Eigen::Index, Eigen::Index) { return stream.normal(); });
  inst.sigma_l = Eigen::LLT<MatrixXd>(test_util::random_spd(d, seed + 3)).matrixL();
  inst.z = VectorXd::NullaryExpr(n, [&](Eigen::Index) { return 0.1 + stream.uniform(); });
  inst.seeds.resize(n);
  for (int i = 0; i < n; ++i) inst.seeds[i] = rng::derive_seed(seed, {4, std::uint64_t(i)});
  return inst;
}

template <typename Fn>
auto with_threads(int k, Fn&& fn) {
#ifdef _OPENMP
  const int before = omp_get_max_threads();
  omp_set_num_threads(k);
  auto result = fn();
  omp_set_num_threads(before);
  return result;
#else
  (void)k;
  return fn();
#endif
}

}  // namespace

TEST_CASE("parallel residual quadratic forms are bitwise equal to the serial reference") {
  const Instance inst = make_instance(3000, 3, 2, 10);
  const VectorXd par = kernels::residual_quadforms(inst.X, inst.Y, inst.beta, inst.sigma_l);
  const VectorXd ser = reference::residual_quadforms(inst.X, inst.Y, inst.beta, inst.sigma_l);
  CHECK((par.array() == ser.array()).all());
}

TEST_CASE("blocked sum matches the plain sum and ignores thread count") {
  rng::Stream stream(3);
  VectorXd values = VectorXd::NullaryExpr(50001, [&](Eigen::Index) { return stream.normal(); });
  const double blocked = kernels::blocked_sum(values);
  const double plain = reference::plain_sum(values);
  CHECK(blocked == doctest::Approx(plain).epsilon(1e-13));

  const double one = with_threads(1, [&] { return kernels::blocked_sum(values); });
  const double four = with_threads(4, [&] { return kernels::blocked_sum(values); });
  CHECK(one == four);
}

TEST_CASE("weighted Gram blocks match the reference and a dense oracle") {
  const Instance inst = make_instance(5000, 3, 2, 77);
  const auto par = kernels::weighted_gram(inst.X, inst.Y, inst.z);
  const auto ser = reference::weighted_gram(inst.X, inst.Y, inst.z);
  CHECK(par.xtwx.isApprox(ser.xtwx, 1e-12));
  CHECK(par.xtwy.isApprox(ser.xtwy, 1e-12));
  CHECK(par.ytwy.isApprox(ser.ytwy, 1e-12));

  const MatrixXd dense = inst.X.transpose() * inst.z.asDiagonal() * inst.X;
  CHECK(par.xtwx.isApprox(dense, 1e-12));

  const auto one = with_threads(1, [&] { return kernels::weighted_gram(inst.X, inst.Y, inst.z); });
  const auto four = with_threads(4, [&] { return kernels::weighted_gram(inst.X, inst.Y, inst.z); });
  CHECK((one.xtwx.array() == four.xtwx.array()).all());
  CHECK((one.xtwy.array() == four.xtwy.array()).all());
  CHECK((one.ytwy.array() == four.ytwy.array()).all());
}

TEST_CASE("latent sampling is reproducible, thread-invariant, and matches the reference") {
  const Instance inst = make_instance(2000, 2, 2, 55);
  const MixingDensity mixing = MixingDensity::gamma_nu_half(5.0, 2);
  const VectorXd r = kernels::residual_quadforms(inst.X, inst.Y, inst.beta, inst.sigma_l);

  const VectorXd par = kernels::sample_latents(mixing, r, inst.seeds);
  const VectorXd ser = reference::sample_latents(mixing, r, inst.seeds);
  CHECK((par.array() == ser.array()).all());
  CHECK(par.minCoeff() > 0.0);

  const VectorXd one = with_threads(1, [&] { return kernels::sample_latents(mixing, r, inst.seeds); });
  const VectorXd four = with_threads(4, [&] { return kernels::sample_latents(mixing, r, inst.seeds); });
  CHECK((one.array() == four.array()).all());
}

TEST_CASE("latent sampling propagates errors out of the parallel region") {
  const auto broken = MixingDensity::user_defined(
      [](double) { return 1.0; }, OriginBehavior::polynomial(0.0), 2, nullptr,
      [](rng::Stream&, double) -> double { throw std::runtime_error("plugin failure"); });
  const VectorXd r = VectorXd::Ones(64);
  const std::vector<std::uint64_t> seeds(64, 9);
  CHECK(test_util::throws_with_substring(
      [&] { kernels::sample_latents(broken, r, seeds); }, "plugin failure"));
}

TEST_CASE("synthetic rows are bitwise equal between parallel and serial paths") {
  const Instance inst = make_instance(4000, 2, 3, 124);
  const MixingDensity mixing = MixingDensity::gamma_nu_half(6.0, 3);
  const MatrixXd par = kernels::synth_rows(inst.X, inst.beta, inst.sigma_l, mixing, inst.seeds);
  const MatrixXd ser = reference::synth_rows(inst.X, inst.beta, inst.sigma_l, mixing, inst.seeds);
  CHECK((par.array() == ser.array()).all());

  const MatrixXd one =
      with_threads(1, [&] { return kernels::synth_rows(inst.X, inst.beta, inst.sigma_l, mixing, inst.seeds); });
  const MatrixXd four =
      with_threads(4, [&] { return kernels::synth_rows(inst.X, inst.beta, inst.sigma_l, mixing, inst.seeds); });
  CHECK((one.array() == four.array()).all());
}

TEST_CASE("autocorrelations match the serial reference") {
  rng::Stream stream(8);
  VectorXd series(4000);
  series(0) = stream.normal();
  for (int t = 1; t < 4000; ++t) series(t) = 0.6 * series(t - 1) + stream.normal();

  const VectorXd par = kernels::autocorrelations(series, 50);
  const VectorXd ser = reference::autocorrelations(series, 50);
  CHECK(par.size() == 51);
  CHECK(par(0) == 1.0);
  for (int k = 0; k <= 50; ++k) CHECK(par(k) == doctest::Approx(ser(k)).epsilon(1e-12));
}

TEST_CASE("kernels check their input dimensions") {
  const Instance inst = make_instance(16, 2, 2, 1);
  CHECK_THROWS_AS(kernels::residual_quadforms(inst.X, inst.Y, MatrixXd::Ones(3, 2), inst.sigma_l),
                  std::invalid_argument);
  CHECK_THROWS_AS(kernels::weighted_gram(inst.X, inst.Y, VectorXd::Ones(7)),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      kernels::sample_latents(MixingDensity::gamma_nu_half(4.0, 2), VectorXd::Ones(16), {}),
      std::invalid_argument);
  CHECK_THROWS_AS(kernels::autocorrelations(VectorXd::Ones(10), 10), std::invalid_argument);
}
