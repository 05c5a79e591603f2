#include "smnreg/model.hpp"

#include "smnreg/quadrature.hpp"
#include "stat_utils.hpp"

#include <doctest.h>

#include <cmath>

using namespace smnreg;

TEST_CASE("datasets validate their dimensions") {
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd::Ones(5, 2), Eigen::MatrixXd::Ones(4, 2)),
                  std::invalid_argument);
  CHECK_NOTHROW(Dataset(Eigen::MatrixXd::Ones(5, 2), Eigen::MatrixXd::Ones(5, 3)));
}

TEST_CASE("a duplicated design column fails the rank condition") {
  Eigen::MatrixXd X(5, 2);
  X.col(0).setOnes();
  X.col(1) = X.col(0);
  const Dataset data(X, test_util::random_design(5, 2, 11));  // any Y
  const auto report = validate_propriety(data, PriorSpec::standard_noninformative(2));
  CHECK_FALSE(report.rank_ok);
  CHECK(report.rank_of_lambda < report.required_rank);
}

TEST_CASE("sample-size condition evaluates the slack n - p - 2d + 2a") {
  const PriorSpec prior(1.5);
  {
    const Dataset data(test_util::random_design(20, 2, 3), test_util::random_design(20, 2, 4));
    const auto report = validate_propriety(data, prior);
    CHECK(report.sample_size_ok);  // 20 > 2 + 4 - 3
    CHECK(report.slack == doctest::Approx(17.0));
  }
  {
    const Dataset data(test_util::random_design(3, 2, 3), test_util::random_design(3, 2, 4));
    const auto report = validate_propriety(data, prior);
    CHECK_FALSE(report.sample_size_ok);  // 3 is not > 3: boundary slack 0
    CHECK(report.slack == doctest::Approx(0.0));
  }
}

TEST_CASE("propriety validation ignores row order") {
  const int n = 12;
  const Dataset data(test_util::random_design(n, 3, 21), test_util::random_design(n, 2, 22));
  const auto base = validate_propriety(data, PriorSpec(1.5));

  std::vector<int> perm{7, 2, 9, 0, 4, 11, 1, 8, 3, 10, 6, 5};
  Eigen::MatrixXd Xp(n, 3), Yp(n, 2);
  for (int i = 0; i < n; ++i) {
    Xp.row(i) = data.X().row(perm[i]);
    Yp.row(i) = data.Y().row(perm[i]);
  }
  const auto permuted = validate_propriety(Dataset(Xp, Yp), PriorSpec(1.5));
  CHECK(permuted.rank_ok == base.rank_ok);
  CHECK(permuted.rank_of_lambda == base.rank_of_lambda);
  CHECK(permuted.slack == base.slack);
}

TEST_CASE("synthetic data from a full-rank design passes the rank condition") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const int n = 8, p = 2, d = 2;  // n >= p + d + 2
    const Eigen::MatrixXd X = test_util::random_design(n, p, 100 + seed);
    const Dataset data = generate_synthetic(Eigen::MatrixXd::Zero(p, d),
                                            Eigen::MatrixXd::Identity(d, d), X,
                                            MixingDensity::gamma_nu_half(5.0, d), seed);
    CHECK(validate_propriety(data, PriorSpec::standard_noninformative(d)).rank_ok);
  }
}

TEST_CASE("gamma-mixing synthetic rows have Student-t covariance") {
  // beta = 0, Sigma = I, nu = 6: row covariance is (nu/(nu-2)) I = 1.5 I
  const int n = 100000, p = 1, d = 2;
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, p);
  const Dataset data = generate_synthetic(Eigen::MatrixXd::Zero(p, d),
                                          Eigen::MatrixXd::Identity(d, d), X,
                                          MixingDensity::gamma_nu_half(6.0, d), 2027);
  const Eigen::MatrixXd cov = data.Y().transpose() * data.Y() / static_cast<double>(n);
  // Monte Carlo error: sd of y1^2 is sqrt(E[y^4] - 2.25) with E[y^4] = 13.5
  // for t_6, so 3 se ~ 0.032 on the diagonal and ~0.02 off it.
  CHECK(std::abs(cov(0, 0) - 1.5) < 0.05);
  CHECK(std::abs(cov(1, 1) - 1.5) < 0.05);
  CHECK(std::abs(cov(0, 1)) < 0.03);
}

TEST_CASE("degenerate mixing collapses to standard normal rows") {
  const int n = 100000, d = 2;
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
  const Dataset data = generate_synthetic(Eigen::MatrixXd::Zero(1, d),
                                          Eigen::MatrixXd::Identity(d, d), X,
                                          MixingDensity::degenerate_one(d), 99);
  const Eigen::MatrixXd cov = data.Y().transpose() * data.Y() / static_cast<double>(n);
  CHECK(std::abs(cov(0, 0) - 1.0) < 0.03);
  CHECK(std::abs(cov(1, 1) - 1.0) < 0.03);
  CHECK(std::abs(cov(0, 1)) < 0.02);
}

TEST_CASE("synthetic generation is deterministic in the seed") {
  const Eigen::MatrixXd X = test_util::random_design(50, 2, 5);
  const Eigen::MatrixXd beta = Eigen::MatrixXd::Ones(2, 2);
  const Eigen::MatrixXd sigma = test_util::random_spd(2, 6);
  const MixingDensity mixing = MixingDensity::gamma_nu_half(4.0, 2);
  const Dataset a = generate_synthetic(beta, sigma, X, mixing, 314159);
  const Dataset b = generate_synthetic(beta, sigma, X, mixing, 314159);
  CHECK(a.Y() == b.Y());
  const Dataset c = generate_synthetic(beta, sigma, X, mixing, 314160);
  CHECK(a.Y() != c.Y());
}

TEST_CASE("synthetic generation rejects bad inputs") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 1);
  Eigen::MatrixXd not_spd(2, 2);
  not_spd << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(generate_synthetic(Eigen::MatrixXd::Zero(1, 2), not_spd, X,
                                     MixingDensity::gamma_nu_half(4.0, 2), 1),
                  std::invalid_argument);
  const auto unsamplable =
      MixingDensity::user_defined([](double) { return 1.0; }, OriginBehavior::polynomial(0.0), 2);
  CHECK_THROWS_AS(generate_synthetic(Eigen::MatrixXd::Zero(1, 2),
                                     Eigen::MatrixXd::Identity(2, 2), X, unsamplable, 1),
                  std::runtime_error);
}

TEST_CASE("mixture density matches the multivariate Student-t closed form") {
  for (double nu : {4.0, 7.0}) {
    for (int d : {1, 2, 3}) {
      const MixingDensity mixing = MixingDensity::gamma_nu_half(nu, d);
      for (double scale : {0.0, 0.5, 1.7, 3.0}) {
        Eigen::VectorXd eps = Eigen::VectorXd::Constant(d, scale / std::sqrt(double(d)));
        const double got = mixture_error_density(eps, mixing);
        const double want = test_util::mvt_density(eps, nu);
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("degenerate mixture density is the standard normal") {
  const MixingDensity mixing = MixingDensity::degenerate_one(2);
  const double at_zero = mixture_error_density(Eigen::VectorXd::Zero(2), mixing);
  CHECK(at_zero == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("mixture density is symmetric in epsilon") {
  const MixingDensity mixing = MixingDensity::gamma_nu_half(5.0, 2);
  Eigen::VectorXd eps(2);
  eps << 0.4, -1.3;
  CHECK(mixture_error_density(eps, mixing) == mixture_error_density(-eps, mixing));
}

TEST_CASE("mixture density integrates to one") {
  // d = 1: 2 * integral over (0, inf); d = 2: 2 pi * integral of r f(r).
  // The outer tolerance is loose because the integrand is itself a
  // quadrature result with ~1e-9 relative noise.
  const MixingDensity m1 = MixingDensity::gamma_nu_half(5.0, 1);
  const double total1 = 2.0 * integrate_positive_axis(
                                  [&](double e) {
                                    return mixture_error_density(
                                        Eigen::VectorXd::Constant(1, e), m1);
                                  },
                                  1e-5);
  CHECK(total1 == doctest::Approx(1.0).epsilon(1e-4));

  const MixingDensity m2 = MixingDensity::gamma_nu_half(5.0, 2);
  const double total2 = 2.0 * M_PI * integrate_positive_axis(
                                         [&](double r) {
                                           Eigen::VectorXd eps(2);
                                           eps << r, 0.0;
                                           return r * mixture_error_density(eps, m2);
                                         },
                                         1e-5);
  CHECK(total2 == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("mixture density reports divergent integrals") {
  // inverse-gamma shape 1 fails the d = 2 tail condition at eps = 0
  const auto inv_gamma = MixingDensity::user_defined(
      [](double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; },
      OriginBehavior::faster_than_polynomial(), 2);
  CHECK_THROWS_AS(mixture_error_density(Eigen::VectorXd::Zero(2), inv_gamma),
                  DivergentIntegral);
}
