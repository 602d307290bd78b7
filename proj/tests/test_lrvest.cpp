#include <doctest.h>

#include "hidimcov/lrvest.hpp"
#include "hidimcov/model.hpp"

#include <random>

using namespace hdcov;

namespace {

MatrixXd ar_panel(Index n, Index d, std::uint64_t seed) {
  const auto s = CoefficientScheme::ar1_geometric(VectorXd::LinSpaced(d, 0.1, 0.7), 64);
  return simulate(s, InnovationSpec::student_t(9.0), n, seed).data;
}

// Windowed long-run covariance of two centered series, by direct loops.
double naive_lrv(const VectorXd& a, const VectorXd& b, const KernelSpec& k) {
  const Index n = a.size();
  auto lag = [&](const VectorXd& x, const VectorXd& y, Index tau) {
    double s = 0.0;
    for (Index t = 0; t + tau < n; ++t) s += x[t] * y[t + tau];
    return s / static_cast<double>(n);
  };
  double total = lag(a, b, 0);
  for (Index tau = 1; tau <= k.bandwidth; ++tau) total += 2.0 * k.weight(tau) * lag(a, b, tau);
  return total;
}

VectorXd centered(VectorXd x) { return (x.array() - x.mean()).matrix(); }

}  // namespace

TEST_CASE("lag windows") {
  const KernelSpec bart{Window::bartlett, 4};
  CHECK(bart.weight(0) == 1.0);
  CHECK(bart.weight(2) == doctest::Approx(0.6));
  CHECK(bart.weight(5) == 0.0);
  CHECK(bart.weight(-2) == bart.weight(2));
  const KernelSpec rect{Window::rectangular, 3};
  CHECK(rect.weight(3) == 1.0);
  CHECK(rect.weight(4) == 0.0);
  const KernelSpec parzen{Window::parzen, 3};
  CHECK(parzen.weight(1) == doctest::Approx(1.0 - 6.0 / 16.0 + 6.0 / 64.0));
  CHECK(parzen.weight(3) == doctest::Approx(2.0 / 64.0));
  CHECK(window_from_string("parzen") == Window::parzen);
  CHECK_THROWS_AS(window_from_string("qs"), std::invalid_argument);
}

TEST_CASE("default bandwidth") {
  CHECK(default_bandwidth(8) == 2);
  CHECK(default_bandwidth(1000) == 10);
  CHECK(default_bandwidth(1001) == 11);
  CHECK_THROWS_AS(default_bandwidth(7), std::invalid_argument);
}

TEST_CASE("entrywise estimators match direct loops") {
  const MatrixXd y = ar_panel(300, 4, 3);
  const KernelSpec k{Window::bartlett, 6};
  const VectorXd sq1 = centered(y.col(1).array().square()), sq3 = centered(y.col(3).array().square());
  double lag2 = 0.0;
  for (Index t = 0; t + 2 < 300; ++t) lag2 += sq1[t] * sq3[t + 2];
  CHECK(gamma_hat(y, 1, 3, 2) == doctest::Approx(lag2 / 300.0).epsilon(1e-12));
  CHECK(beta_hat_sq(y, 1, 3, k) == doctest::Approx(naive_lrv(sq1, sq3, k)).epsilon(1e-12));

  const double kappa = y.col(0).dot(y.col(2)) / 300.0;
  const VectorXd prod = (y.col(0).array() * y.col(2).array() - kappa).matrix();
  CHECK(sigma_hat_sq(y, 0, 2, k) == doctest::Approx(naive_lrv(prod, prod, k)).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_hat(y, 0, 4, 0), std::out_of_range);
  CHECK_THROWS_AS(beta_hat_sq(y, 0, 0, KernelSpec{Window::bartlett, 300}), std::invalid_argument);
}

TEST_CASE("fast trace variance equals the pairwise sweep") {
  for (Window w : {Window::bartlett, Window::rectangular, Window::parzen}) {
    const MatrixXd y = ar_panel(257, 9, 5);
    const KernelSpec k{w, 7};
    const double fast = sigma_tr_hat_sq(y, k);
    const double slow = sigma_tr_hat_sq_pairwise(y, k);
    CHECK(std::abs(fast - slow) <= 1e-10 * std::max(1.0, std::abs(slow)));
    const double fast_sum = sum_sigma_hat_sq(y, k);
    const double slow_sum = sum_sigma_hat_sq_pairwise(y, k);
    CHECK(std::abs(fast_sum - slow_sum) <= 1e-10 * std::max(1.0, std::abs(slow_sum)));
  }
}

TEST_CASE("normal helpers") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(normal_quantile(0.1)) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("trace interval") {
  const MatrixXd y = ar_panel(400, 5, 9);
  const KernelSpec k{Window::bartlett, default_bandwidth(400)};
  const TraceInterval ci = trace_ci(y, k, 0.9);
  CHECK(ci.center == doctest::Approx(y.squaredNorm() / 2000.0));
  CHECK(ci.sigma_hat_sq_raw == doctest::Approx(sigma_tr_hat_sq(y, k)));
  CHECK(ci.hi - ci.lo == doctest::Approx(2.0 * normal_quantile(0.95) * ci.sigma_hat / 20.0));
  const TraceInterval fixed = trace_ci_with_variance(y, 4.0, 0.95);
  CHECK(fixed.hi - fixed.center == doctest::Approx(1.959963984540054 * 2.0 / 20.0));
  CHECK_THROWS_AS(trace_ci(y, k, 1.0), std::invalid_argument);
}

TEST_CASE("white noise trace variance is consistent") {
  // d = 1 white noise: squares are i.i.d. with variance 2.
  const auto s = CoefficientScheme::white_noise(1, 4);
  const MatrixXd y = simulate(s, InnovationSpec::gaussian(), 200000, 4).data;
  CHECK(sigma_tr_hat_sq(y, KernelSpec{Window::bartlett, default_bandwidth(200000)}) ==
        doctest::Approx(2.0).epsilon(0.05));
}
