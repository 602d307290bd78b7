#include <doctest.h>

#include "hidimcov/covest.hpp"
#include "hidimcov/linalg.hpp"
#include "hidimcov/shrink.hpp"

#include <Eigen/Eigenvalues>

#include <random>

using namespace hdcov;

namespace {

MatrixXd random_spd(Index d, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  MatrixXd a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = z(gen);
  return a * a.transpose() / static_cast<double>(d);
}

}  // namespace

TEST_CASE("shrink matrix endpoints") {
  const MatrixXd c = random_spd(5, 1);
  const double mu = mu_hat(c);
  CHECK(mu == doctest::Approx(c.trace() / 5.0));
  CHECK(shrink_matrix(c, 0.0, mu) == c);
  CHECK(shrink_matrix(c, 1.0, mu).isApprox(mu * MatrixXd::Identity(5, 5)));
  CHECK_THROWS_AS(shrink_matrix(c, 1.5, mu), std::invalid_argument);
}

TEST_CASE("shrinkage moves eigenvalues affinely") {
  const MatrixXd c = random_spd(8, 2);
  const double mu = mu_hat(c), W = 0.3;
  const VectorXd before = jacobi_eigen(c).values;
  const VectorXd after = jacobi_eigen(shrink_matrix(c, W, mu)).values;
  CHECK((after - ((1.0 - W) * before.array() + W * mu).matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("oracle weight is one when the target is exact") {
  // d = 1: Sigma is a scalar, so mu I = Sigma.
  const auto wn = CoefficientScheme::white_noise(1, 4);
  CHECK(w_star_oracle(wn, InnovationSpec::gaussian(), 100).W_star == doctest::Approx(1.0));
  // K = I: coordinates are distinct lags of one stream, Sigma = I.
  const auto lags = CoefficientScheme::table(MatrixXd::Identity(4, 4));
  const auto o = w_star_oracle(lags, InnovationSpec::gaussian(), 50);
  CHECK(o.W_star == doctest::Approx(1.0));
  CHECK(o.denominator == doctest::Approx(o.numerator));
}

TEST_CASE("oracle risk terms match simulation") {
  VectorXd rho(3);
  rho << 0.2, 0.5, 0.8;
  const auto s = CoefficientScheme::ar1_geometric(rho, 48);
  for (const auto& innov : {InnovationSpec::gaussian(), InnovationSpec::two_point(1.0)}) {
    const Index n = 40;
    const auto o = w_star_oracle(s, innov, n);
    const MatrixXd sigma = true_covariance(s, innov);
    const double mu = trace_star(sigma);
    const int reps = 4000;
    VectorXd num(reps), den(reps);
    for (int r = 0; r < reps; ++r) {
      const MatrixXd c = sample_cov(simulate(s, innov, n, 1000 + r).data).matrix;
      num[r] = frobenius_star_sq(MatrixXd(c - sigma));
      MatrixXd gap = -c;
      gap.diagonal().array() += mu;
      den[r] = frobenius_star_sq(gap);
    }
    const double se_num = std::sqrt((num.array() - num.mean()).square().sum() / (reps - 1) / reps);
    const double se_den = std::sqrt((den.array() - den.mean()).square().sum() / (reps - 1) / reps);
    CHECK(std::abs(num.mean() - o.numerator) <= 4.0 * se_num);
    CHECK(std::abs(den.mean() - o.denominator) <= 4.0 * se_den);
  }
}

TEST_CASE("estimated weight") {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::LinSpaced(6, 0.0, 0.6), 32);
  const MatrixXd y = simulate(s, InnovationSpec::gaussian(), 500, 3).data;
  const KernelSpec k{Window::bartlett, default_bandwidth(500)};
  const auto w = w_star_hat(y, k);
  CHECK(w.numerator == doctest::Approx(std::max(0.0, sum_sigma_hat_sq_pairwise(y, k) / 3000.0)).epsilon(1e-10));
  const MatrixXd c = sample_cov(y).matrix;
  MatrixXd gap = -c;
  gap.diagonal().array() += mu_hat(c);
  CHECK(w.denominator == doctest::Approx(frobenius_star_sq(gap)));
  CHECK(w.W_hat == doctest::Approx(std::clamp(w.numerator / w.denominator, 0.0, 1.0)));

  const auto r = shrink_estimate(y, k);
  CHECK(r.W_used == w.W_hat);
  CHECK(r.W_source == WeightSource::estimated);
  CHECK(r.sigma_s.isApprox(shrink_matrix(c, w.W_hat, mu_hat(c))));

  // Alternating unit rows: Sigma_hat = mu I exactly, zero denominator.
  MatrixXd iso(20, 2);
  for (Index i = 0; i < 20; ++i) iso.row(i) << (i % 2 ? 1.0 : 0.0), (i % 2 ? 0.0 : 1.0);
  const auto degenerate = w_star_hat(iso, KernelSpec{Window::bartlett, 2});
  CHECK(degenerate.denominator == 0.0);
  CHECK(degenerate.W_hat == 1.0);
}

TEST_CASE("oracle comparison") {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::LinSpaced(4, 0.1, 0.5), 32);
  const MatrixXd y = simulate(s, InnovationSpec::gaussian(), 200, 8).data;
  const MatrixXd c = sample_cov(y).matrix, sigma = true_covariance(s, InnovationSpec::gaussian());
  const WeightVector e0 = unit_vector(0, 4), e1 = unit_vector(1, 4);
  const auto same = compare_oracle(c, sigma, e0, e1, 0.4, 0.4);
  CHECK(same.delta_hat_vs_oraclehat == 0.0);
  const auto diff = compare_oracle(c, sigma, e0, e1, 0.1, 0.4);
  CHECK(diff.delta_hat_vs_oraclehat == doctest::Approx(0.3 * std::abs(c(0, 1))));
  const auto on_diag = compare_oracle(c, sigma, e0, e0, 0.1, 0.4);
  CHECK(on_diag.delta_hat_vs_oraclehat == doctest::Approx(0.3 * std::abs(c(0, 0) - mu_hat(c))));
  CHECK(on_diag.delta_hat_vs_pop_oracle ==
        doctest::Approx(std::abs(shrink_matrix(c, 0.1, mu_hat(c))(0, 0) - true_shrunk(sigma, 0.4)(0, 0))));
}
