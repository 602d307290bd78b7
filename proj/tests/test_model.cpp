#include <doctest.h>

#include "hidimcov/covest.hpp"
#include "hidimcov/model.hpp"
#include "hidimcov/panel_io.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace hdcov;

namespace {

// Direct double loop Y_i(nu) = sum_j c_j(nu) eps_{i-j}.
MatrixXd naive_apply(const CoefficientScheme& s, const InnovationStream& eps, Index n) {
  MatrixXd y = MatrixXd::Zero(n, s.dim());
  for (Index i = 0; i < n; ++i)
    for (Index nu = 0; nu < s.dim(); ++nu)
      for (Index j = 0; j <= s.horizon(); ++j) y(i, nu) += s.coef(nu, j) * eps(i - j);
  return y;
}

}  // namespace

TEST_CASE("innovation fourth moments") {
  CHECK(InnovationSpec::gaussian(2.0).gamma4() == doctest::Approx(12.0));
  CHECK(InnovationSpec::two_point(1.0).gamma4() == doctest::Approx(1.0));
  CHECK(InnovationSpec::two_point(1.0).cumulant4() == doctest::Approx(-2.0));
  CHECK(InnovationSpec::student_t(10.0).gamma4() == doctest::Approx(4.0));
  CHECK_THROWS_AS(InnovationSpec::student_t(4.5), std::invalid_argument);
  CHECK_THROWS_AS(InnovationSpec::gaussian(-1.0), std::invalid_argument);
}

TEST_CASE("white noise covariance is sigma^2 times the all-ones matrix") {
  const auto s = CoefficientScheme::white_noise(3, 8);
  const MatrixXd sigma = true_covariance(s, InnovationSpec::gaussian(2.0));
  CHECK(sigma.isApprox(MatrixXd::Constant(3, 3, 2.0)));
}

TEST_CASE("ar1 covariance matches the truncated geometric series") {
  VectorXd rho(3);
  rho << 0.5, -0.3, 0.9;
  const Index J = 40;
  const auto s = CoefficientScheme::ar1_geometric(rho, J);
  const MatrixXd sigma = true_covariance(s, InnovationSpec::gaussian(1.5));
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 3; ++b) {
      const double r = rho[a] * rho[b];
      const double expected = 1.5 * (1.0 - std::pow(r, J + 1)) / (1.0 - r);
      CHECK(sigma(a, b) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("power decay envelope and coefficient access") {
  VectorXd scale(2);
  scale << 1.0, 2.0;
  const auto s = CoefficientScheme::power_decay(scale, 0.2, 16);
  const double e = 0.75 + 0.1;
  CHECK(s.coef(1, 0) == doctest::Approx(2.0));
  CHECK(s.coef(0, 4) == doctest::Approx(std::pow(4.0, -e)));
  CHECK(s.coef(0, 17) == 0.0);
  CHECK_THROWS_AS(s.coef(2, 0), std::out_of_range);
  CHECK_THROWS_AS(CoefficientScheme::power_decay(scale, 0.6, 16), std::invalid_argument);
}

TEST_CASE("assumption check") {
  VectorXd rho = VectorXd::Constant(2, 0.6);
  const auto ar = verify_assumption_a(CoefficientScheme::ar1_geometric(rho, 64));
  CHECK(ar.pass);
  CHECK(ar.worst_j < 64);

  // Envelope ratio is flat (= scale^2) for the power scheme.
  const auto pd = verify_assumption_a(CoefficientScheme::power_decay(VectorXd::Constant(2, 1.5), 0.25, 64));
  CHECK(pd.c_bound == doctest::Approx(2.25).epsilon(1e-12));

  MatrixXd growing(9, 1);
  for (Index j = 0; j < 9; ++j) growing(j, 0) = 1.0 + j;
  CHECK_FALSE(verify_assumption_a(CoefficientScheme::table(growing)).pass);
}

TEST_CASE("blocked simulation equals the direct convolution") {
  VectorXd rho(4);
  rho << 0.1, 0.4, -0.6, 0.8;
  const auto s = CoefficientScheme::ar1_geometric(rho, 30);
  const auto eps = draw_innovations(InnovationSpec::gaussian(), 1100, 30, 99);
  const MatrixXd fast = apply_scheme(s, eps, 1100);
  CHECK((fast - naive_apply(s, eps, 1100)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simulation is determined by the seed") {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::Constant(2, 0.5), 32);
  const auto innov = InnovationSpec::student_t(8.0);
  const auto a = simulate(s, innov, 300, 5);
  const auto b = simulate(s, innov, 300, 5);
  const auto c = simulate(s, innov, 300, 6);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
  CHECK(a.scheme_digest == s.digest());
}

TEST_CASE("innovation families have the requested variance") {
  const Index n = 200000;
  for (const auto& innov : {InnovationSpec::gaussian(2.0), InnovationSpec::student_t(9.0, 2.0),
                            InnovationSpec::two_point(std::sqrt(2.0))}) {
    const auto eps = draw_innovations(innov, n, 0, 11);
    const double var = eps.values.squaredNorm() / static_cast<double>(n);
    CHECK(var == doctest::Approx(2.0).epsilon(0.03));
  }
  const auto tp = draw_innovations(InnovationSpec::two_point(0.5), 100, 0, 3);
  CHECK((tp.values.cwiseAbs().array() == 0.5).all());
}

TEST_CASE("sample covariance is unbiased within Monte Carlo error") {
  VectorXd rho(3);
  rho << 0.2, 0.5, 0.7;
  const auto s = CoefficientScheme::ar1_geometric(rho, 64);
  const auto innov = InnovationSpec::gaussian();
  const MatrixXd sigma = true_covariance(s, innov);
  const int reps = 40;
  MatrixXd mean = MatrixXd::Zero(3, 3), sq = MatrixXd::Zero(3, 3);
  for (int r = 0; r < reps; ++r) {
    const MatrixXd c = sample_cov(simulate(s, innov, 5000, 100 + r).data).matrix;
    mean += c;
    sq += c.cwiseProduct(c);
  }
  mean /= reps;
  const MatrixXd se = ((sq / reps - mean.cwiseProduct(mean)) / (reps - 1)).cwiseSqrt();
  CHECK(((mean - sigma).cwiseAbs().array() <= 5.0 * se.array()).all());
}

TEST_CASE("panel files round-trip") {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::Constant(3, 0.3), 8);
  const SeriesPanel panel = simulate(s, InnovationSpec::gaussian(), 50, 1);
  const auto dir = std::filesystem::temp_directory_path() / "hidimcov_test_model";
  std::filesystem::create_directories(dir);
  for (const char* name : {"p.bin", "p.csv"}) {
    save_panel(dir / name, panel);
    const SeriesPanel back = load_panel(dir / name);
    CHECK(back.data == panel.data);
  }
  CHECK(load_panel(dir / "p.bin").seed == 1);
  std::filesystem::remove_all(dir);
}
