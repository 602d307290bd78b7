#pragma once

#include "hidimcov/types.hpp"

#include <string>

namespace hdcov {

enum class Window { bartlett, rectangular, parzen };

std::string to_string(Window window);
Window window_from_string(const std::string& name);

/// Lag window w_{m tau} = window(tau / (m + 1)), zero beyond the bandwidth m.
struct KernelSpec {
  Window window = Window::bartlett;
  Index bandwidth = 1;

  double weight(Index tau) const;
};

/// ceil(n^{1/3}); satisfies m^2 / n -> 0.
Index default_bandwidth(Index n);

/// (1/n) sum_{k<n-tau} [Y_k(i)^2 - mu(i)] [Y_{k+tau}(j)^2 - mu(j)].
double gamma_hat(const MatrixXd& y, Index i, Index j, Index tau);

/// gamma_hat(0) + 2 sum_{tau=1}^{m} w_{m tau} gamma_hat(tau).
double beta_hat_sq(const MatrixXd& y, Index i, Index j, const KernelSpec& kernel);

/// Lag-tau autocovariance of the product series Y(i) Y(j), centered at kappa(i, j).
double cap_gamma_hat(const MatrixXd& y, Index i, Index j, Index tau);

double sigma_hat_sq(const MatrixXd& y, Index i, Index j, const KernelSpec& kernel);

/// d^{-2} sum_{i,j} beta_hat_sq(i, j). Uses the fact that the double sum of the
/// cross-covariances is the autocovariance of the row sums of centered squares.
double sigma_tr_hat_sq(const MatrixXd& y, const KernelSpec& kernel);

/// Same quantity as an explicit d^2 sweep (reference path).
double sigma_tr_hat_sq_pairwise(const MatrixXd& y, const KernelSpec& kernel);

/// sum_{i,j} sigma_hat_sq(i, j) in O(n d^2 + n d m).
double sum_sigma_hat_sq(const MatrixXd& y, const KernelSpec& kernel);

/// Reference d^2 sweep of sigma_hat_sq.
double sum_sigma_hat_sq_pairwise(const MatrixXd& y, const KernelSpec& kernel);

struct TraceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  double sigma_hat = 0.0;
  double sigma_hat_sq_raw = 0.0;  // before flooring at zero
  double z = 0.0;
};

/// Standard normal quantile.
double normal_quantile(double p);
double normal_cdf(double x);

/// tr*(Sigma_hat) +- z_{1-(1-level)/2} sigma_hat_tr / sqrt(n).
TraceInterval trace_ci(const MatrixXd& y, const KernelSpec& kernel, double level);

/// Interval with a supplied sigma_tr^2 (e.g. the analytic value).
TraceInterval trace_ci_with_variance(const MatrixXd& y, double sigma_tr_sq, double level);

}  // namespace hdcov
