#include <doctest.h>

#include "hidimcov/asymvar.hpp"
#include "hidimcov/covest.hpp"
#include "hidimcov/limit.hpp"

#include <random>

using namespace hdcov;

namespace {

MatrixXd empirical_cov(const MatrixXd& x) {
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

}  // namespace

TEST_CASE("two-block covariance layout") {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::LinSpaced(3, 0.2, 0.6), 64);
  const auto innov = InnovationSpec::gaussian();
  const WeightVector v = unit_vector(0, 3), w = unit_vector(2, 3);
  const LimitModel m = build_limit_model(s, innov, v, w, Construction::two_block);
  const double sd = std::sqrt(3.0);
  CHECK(m.covariance(0, 0) == doctest::Approx(alpha_sq(s, innov, v, w)));
  CHECK(m.covariance(2, 3) == doctest::Approx(m.beta(1, 2) / 3.0));
  CHECK(m.covariance(0, 2) == doctest::Approx(beta_sq(s, innov, v, w, unit_vector(1, 3), unit_vector(1, 3)) / sd));
  CHECK(m.jitter <= 1e-8 * m.covariance.trace() / 4.0);
  MatrixXd jittered = m.covariance;
  jittered.diagonal().array() += m.jitter;
  CHECK((m.factor * m.factor.transpose() - jittered).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(trace_limit_variance(m) == doctest::Approx(sigma_tr_sq(beta_matrix(s, innov, unit_pairs(3)))));

  const LimitModel joint = build_limit_model(s, innov, v, w, Construction::joint);
  CHECK(joint.covariance(0, 0) == doctest::Approx(m.covariance(0, 0) / 4.0));
  CHECK(joint.covariance(2, 3) == doctest::Approx(m.beta(1, 2) / 4.0));
  CHECK(joint.covariance(0, 2) == doctest::Approx(m.cross[1] / 4.0));
  CHECK_THROWS_AS(trace_limit_variance(joint), std::invalid_argument);
}

TEST_CASE("jitter ladder and factorization failure") {
  // White noise: every unit form is the same variable, so the d-block has rank one.
  const auto wn = CoefficientScheme::white_noise(4, 8);
  const LimitModel m = build_limit_model(wn, InnovationSpec::gaussian(), unit_vector(0, 4), unit_vector(0, 4),
                                         Construction::two_block);
  CHECK(m.jitter > 0.0);
  CHECK(m.jitter <= 1e-8 * m.covariance.trace() / 5.0 * (1 + 1e-12));

  MatrixXd beta = MatrixXd::Identity(2, 2);
  beta(0, 0) = -1.0;
  CHECK_THROWS_AS(assemble_limit_model(Construction::two_block, 1.0, beta, VectorXd::Zero(2), 0.0),
                  FactorizationError);
  CHECK_THROWS_AS(assemble_limit_model(Construction::two_block, 1.0, beta, VectorXd::Zero(3), 0.0),
                  std::invalid_argument);
}

TEST_CASE("sampled endpoints reproduce the covariance") {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::LinSpaced(3, 0.1, 0.7), 64);
  const LimitModel m = build_limit_model(s, InnovationSpec::gaussian(), unit_vector(0, 3), unit_vector(1, 3),
                                         Construction::two_block);
  const Index reps = 40000;
  const MatrixXd x = sample_endpoints(m, reps, 12);
  const MatrixXd emp = empirical_cov(x);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      const double se = std::sqrt((m.covariance(i, i) * m.covariance(j, j) + m.covariance(i, j) * m.covariance(i, j)) /
                                  static_cast<double>(reps));
      CHECK(std::abs(emp(i, j) - m.covariance(i, j)) <= 5.0 * se);
    }
  // Paths: increments over [0, 1/2] and [1/2, 1] are independent with half the covariance.
  const auto paths = sample_paths(m, {0.0, 0.5, 1.0}, 20000, 3);
  MatrixXd first(20000, 4), second(20000, 4);
  for (Index r = 0; r < 20000; ++r) {
    first.row(r) = paths[r].row(1);
    second.row(r) = paths[r].row(2) - paths[r].row(1);
  }
  CHECK(empirical_cov(first)(0, 0) == doctest::Approx(0.5 * m.covariance(0, 0)).epsilon(0.05));
  const double cross = (first.col(0).array() * second.col(0).array()).mean();
  CHECK(std::abs(cross) < 5.0 * 0.5 * m.covariance(0, 0) / std::sqrt(20000.0));
  CHECK(paths[0].row(0).isZero());
}

TEST_CASE("sampling is independent of the worker count") {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::Constant(2, 0.4), 16);
  const LimitModel m = build_limit_model(s, InnovationSpec::gaussian(), unit_vector(0, 2), unit_vector(1, 2),
                                         Construction::joint);
  CHECK(sample_endpoints(m, 257, 5, 1) == sample_endpoints(m, 257, 5, 4));
}

TEST_CASE("shrinkage functional variance decomposition") {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::LinSpaced(4, 0.2, 0.5), 64);
  const auto innov = InnovationSpec::gaussian();
  VectorXd vx(4);
  vx << 0.5, 0.5, 0.5, 0.5;
  const WeightVector v(vx);
  const LimitModel m = build_limit_model(s, innov, v, v, Construction::two_block);
  const double W = 0.4;
  const ShrinkVarianceTerms t = shrink_functional_variance(m, W);
  VectorXd u = VectorXd::Constant(5, W * m.vw_inner / 2.0);
  u[0] = 1.0 - W;
  CHECK(t.total() == doctest::Approx(u.dot(m.covariance * u)).epsilon(1e-12));

  const MatrixXd x = sample_endpoints(m, 40000, 8);
  VectorXd f(40000);
  for (Index r = 0; r < 40000; ++r) f[r] = shrink_functional(m, x.row(r).transpose(), W);
  const double var = (f.array() - f.mean()).square().sum() / 39999.0;
  CHECK(var == doctest::Approx(t.total()).epsilon(0.05));

  // Orthogonal weights: only the nonparametric term survives.
  const LimitModel o = build_limit_model(s, innov, unit_vector(0, 4), unit_vector(3, 4), Construction::two_block);
  const ShrinkVarianceTerms to = shrink_functional_variance(o, W);
  CHECK(to.target == 0.0);
  CHECK(to.cross == 0.0);
  CHECK(to.total() == doctest::Approx((1 - W) * (1 - W) * o.alpha_sq));
}

TEST_CASE("martingale approximation") {
  // White noise: xi_k = f0 (eps_k^2 - sigma^2) exactly.
  const auto wn = CoefficientScheme::white_noise(2, 4);
  const auto innov = InnovationSpec::gaussian();
  const WeightVector e = unit_vector(0, 2);
  const auto [panel, eps] = simulate_with_innovations(wn, innov, 500, 1);
  const VectorXd m = martingale_path(wn, innov, eps, e, e, 500);
  const VectorXd xi = xi_terms(panel.data, true_covariance(wn, innov), e, e);
  CHECK(std::abs(m[499] - xi.sum()) < 1e-10);

  // General scheme: the martingale differences are uncorrelated and mean zero, and
  // Var(M_n)/n matches alpha^2 (the differences have variance alpha^2).
  const auto ar = CoefficientScheme::ar1_geometric(VectorXd::Constant(1, 0.5), 64);
  const WeightVector u = unit_vector(0, 1);
  const Index n = 400;
  const int reps = 3000;
  VectorXd ends(reps);
  for (int r = 0; r < reps; ++r) {
    const auto draw = simulate_with_innovations(ar, innov, n, 50 + r);
    ends[r] = martingale_path(ar, innov, draw.second, u, u, n)[n - 1];
  }
  const double var = ends.squaredNorm() / reps / static_cast<double>(n);
  CHECK(var == doctest::Approx(alpha_sq(ar, innov, u, u)).epsilon(0.08));
}
