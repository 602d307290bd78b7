#include "hidimcov/lrvest.hpp"

#include "hidimcov/linalg.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <stdexcept>

namespace hdcov {

std::string to_string(Window window) {
  switch (window) {
    case Window::bartlett: return "bartlett";
    case Window::rectangular: return "rectangular";
    case Window::parzen: return "parzen";
  }
  return "unknown";
}

Window window_from_string(const std::string& name) {
  if (name == "bartlett") return Window::bartlett;
  if (name == "rectangular") return Window::rectangular;
  if (name == "parzen") return Window::parzen;
  throw std::invalid_argument("unknown kernel window '" + name + "'");
}

double KernelSpec::weight(Index tau) const {
  if (tau < 0) tau = -tau;
  if (tau > bandwidth) return 0.0;
  const double x = static_cast<double>(tau) / static_cast<double>(bandwidth + 1);
  switch (window) {
    case Window::bartlett:
      return 1.0 - x;
    case Window::rectangular:
      return 1.0;
    case Window::parzen:
      return x <= 0.5 ? 1.0 - 6.0 * x * x + 6.0 * x * x * x : 2.0 * std::pow(1.0 - x, 3);
  }
  return 0.0;
}

Index default_bandwidth(Index n) {
  if (n < 8) throw std::invalid_argument("default_bandwidth: requires n >= 8");
  return static_cast<Index>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
}

namespace {

void check_coord(const MatrixXd& y, Index i) {
  if (i < 0 || i >= y.cols()) throw std::out_of_range("coordinate index out of range");
}

void check_lag(const MatrixXd& y, Index tau) {
  if (tau < 0 || tau > y.rows() - 1) throw std::out_of_range("lag out of range");
}

void check_kernel(const MatrixXd& y, const KernelSpec& kernel) {
  if (kernel.bandwidth < 0) throw std::invalid_argument("bandwidth must be nonnegative");
  if (kernel.bandwidth >= y.rows()) throw std::invalid_argument("bandwidth must be < n");
}

/// (1/n) sum_{k<n-tau} a_k b_{k+tau}.
double lagged_cross(const VectorXd& a, const VectorXd& b, Index tau) {
  const Index n = a.size();
  return a.head(n - tau).dot(b.tail(n - tau)) / static_cast<double>(n);
}

double windowed_lrv(const VectorXd& a, const VectorXd& b, const KernelSpec& kernel) {
  double s = lagged_cross(a, b, 0);
  for (Index tau = 1; tau <= kernel.bandwidth; ++tau) s += 2.0 * kernel.weight(tau) * lagged_cross(a, b, tau);
  return s;
}

VectorXd centered_square(const MatrixXd& y, Index i) {
  VectorXd s = y.col(i).array().square();
  return (s.array() - s.mean()).matrix();
}

VectorXd centered_product(const MatrixXd& y, Index i, Index j) {
  VectorXd p = y.col(i).cwiseProduct(y.col(j));
  return (p.array() - p.mean()).matrix();
}

}  // namespace

double gamma_hat(const MatrixXd& y, Index i, Index j, Index tau) {
  check_coord(y, i);
  check_coord(y, j);
  check_lag(y, tau);
  return lagged_cross(centered_square(y, i), centered_square(y, j), tau);
}

double beta_hat_sq(const MatrixXd& y, Index i, Index j, const KernelSpec& kernel) {
  check_coord(y, i);
  check_coord(y, j);
  check_kernel(y, kernel);
  return windowed_lrv(centered_square(y, i), centered_square(y, j), kernel);
}

double cap_gamma_hat(const MatrixXd& y, Index i, Index j, Index tau) {
  check_coord(y, i);
  check_coord(y, j);
  check_lag(y, tau);
  const VectorXd p = centered_product(y, i, j);
  return lagged_cross(p, p, tau);
}

double sigma_hat_sq(const MatrixXd& y, Index i, Index j, const KernelSpec& kernel) {
  check_coord(y, i);
  check_coord(y, j);
  check_kernel(y, kernel);
  const VectorXd p = centered_product(y, i, j);
  return windowed_lrv(p, p, kernel);
}

double sigma_tr_hat_sq(const MatrixXd& y, const KernelSpec& kernel) {
  check_kernel(y, kernel);
  const MatrixXd sq = y.array().square();
  const VectorXd mu = sq.colwise().mean();
  const VectorXd row_sum = (sq.rowwise() - mu.transpose()).rowwise().sum();
  const double d = static_cast<double>(y.cols());
  return windowed_lrv(row_sum, row_sum, kernel) / (d * d);
}

double sigma_tr_hat_sq_pairwise(const MatrixXd& y, const KernelSpec& kernel) {
  check_kernel(y, kernel);
  double s = 0.0;
  for (Index i = 0; i < y.cols(); ++i)
    for (Index j = 0; j < y.cols(); ++j) s += beta_hat_sq(y, i, j, kernel);
  const double d = static_cast<double>(y.cols());
  return s / (d * d);
}

// sum_{i,j} Gamma_hat^{(i,j)}(tau)
//   = (1/n) sum_{t<n-tau} [(Y_t . Y_{t+tau})^2 - q_t - q_{t+tau} + ||kappa||_F^2],
// with kappa the uncentered sample covariance and q_t = Y_t' kappa Y_t.
double sum_sigma_hat_sq(const MatrixXd& y, const KernelSpec& kernel) {
  check_kernel(y, kernel);
  const Index n = y.rows();
  const MatrixXd kappa = (y.transpose() * y) / static_cast<double>(n);
  const VectorXd q = (y * kappa).cwiseProduct(y).rowwise().sum();
  const double kappa_sq = kappa.squaredNorm();
  auto summed_gamma = [&](Index tau) {
    const Index len = n - tau;
    const VectorXd dots = y.topRows(len).cwiseProduct(y.bottomRows(len)).rowwise().sum();
    const double s = dots.squaredNorm() - q.head(len).sum() - q.tail(len).sum() +
                     static_cast<double>(len) * kappa_sq;
    return s / static_cast<double>(n);
  };
  double total = summed_gamma(0);
  for (Index tau = 1; tau <= kernel.bandwidth; ++tau) total += 2.0 * kernel.weight(tau) * summed_gamma(tau);
  return total;
}

double sum_sigma_hat_sq_pairwise(const MatrixXd& y, const KernelSpec& kernel) {
  check_kernel(y, kernel);
  double s = 0.0;
  for (Index i = 0; i < y.cols(); ++i)
    for (Index j = 0; j < y.cols(); ++j) s += sigma_hat_sq(y, i, j, kernel);
  return s;
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

TraceInterval trace_ci_with_variance(const MatrixXd& y, double sigma_tr_sq, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("trace_ci: level must lie in (0, 1)");
  if (y.rows() < 1) throw std::invalid_argument("trace_ci: empty panel");
  TraceInterval ci;
  ci.center = y.colwise().squaredNorm().sum() / (static_cast<double>(y.rows()) * static_cast<double>(y.cols()));
  ci.sigma_hat_sq_raw = sigma_tr_sq;
  ci.sigma_hat = std::sqrt(std::max(sigma_tr_sq, 0.0));
  ci.z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  const double half = ci.z * ci.sigma_hat / std::sqrt(static_cast<double>(y.rows()));
  ci.lo = ci.center - half;
  ci.hi = ci.center + half;
  return ci;
}

TraceInterval trace_ci(const MatrixXd& y, const KernelSpec& kernel, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("trace_ci: level must lie in (0, 1)");
  return trace_ci_with_variance(y, sigma_tr_hat_sq(y, kernel), level);
}

}  // namespace hdcov
