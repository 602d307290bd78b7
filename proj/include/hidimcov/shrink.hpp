#pragma once

#include "hidimcov/lrvest.hpp"
#include "hidimcov/model.hpp"
#include "hidimcov/weights.hpp"

#include <string>

namespace hdcov {

enum class WeightSource { fixed, estimated, oracle };

std::string to_string(WeightSource source);

struct ShrinkageResult {
  MatrixXd sigma_s;
  double W_used = 0.0;
  WeightSource W_source = WeightSource::fixed;
  double mu_hat = 0.0;
  double raw_W = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

/// tr*(cov).
double mu_hat(const MatrixXd& cov);

/// (1 - W) cov + W mu I.
MatrixXd shrink_matrix(const MatrixXd& cov, double W, double mu);

/// (1 - W) Sigma + W tr*(Sigma) I.
MatrixXd true_shrunk(const MatrixXd& sigma, double W);

struct OracleWeight {
  double W_star = 0.0;
  double numerator = 0.0;    // E ||Sigma_hat - Sigma||*_F^2
  double denominator = 0.0;  // E ||mu I - Sigma_hat||*_F^2
};

/// Exact finite-n MSE-optimal weight for sample size n. The numerator sums the
/// exact variances Var(sqrt(n) Sigma_hat(i, j)) = Gamma(0) + 2 sum_{tau<n} (1 - tau/n) Gamma(tau),
/// with Gamma from the fourth-moment expansion of the linear process.
OracleWeight w_star_oracle(const CoefficientScheme& scheme, const InnovationSpec& innov, Index n);

struct EstimatedWeight {
  double W_hat = 0.0;
  double raw = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

/// Plug-in weight: (nd)^{-1} sum sigma_hat^2(i, j) over ||mu_hat I - Sigma_hat||*_F^2.
/// The numerator is floored at zero, the ratio clamped to [0, 1]; a zero
/// denominator yields W_hat = 1.
EstimatedWeight w_star_hat(const MatrixXd& y, const KernelSpec& kernel);

/// Sample covariance shrunk with the estimated weight.
ShrinkageResult shrink_estimate(const MatrixXd& y, const KernelSpec& kernel);

/// Sample covariance shrunk with a caller-supplied weight.
ShrinkageResult shrink_with_weight(const MatrixXd& y, double W, WeightSource source);

struct OracleComparison {
  double delta_hat_vs_oraclehat = 0.0;  // Delta(Sigma^s(W_hat), Sigma^s(W*))
  double delta_hat_vs_pop_oracle = 0.0; // Delta(Sigma^s(W_hat), Sigma_0^s(W*))
  double W_hat = 0.0;
  double W_star = 0.0;
};

OracleComparison compare_oracle(const MatrixXd& sample_cov, const MatrixXd& sigma, const WeightVector& v,
                                const WeightVector& w, double W_hat, double W_star);

OracleComparison compare_oracle(const MatrixXd& y, const MatrixXd& sigma, const WeightVector& v,
                                const WeightVector& w, const KernelSpec& kernel, double W_star);

}  // namespace hdcov
