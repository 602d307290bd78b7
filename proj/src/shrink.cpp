#include "hidimcov/shrink.hpp"

#include "hidimcov/covest.hpp"
#include "hidimcov/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace hdcov {

std::string to_string(WeightSource source) {
  switch (source) {
    case WeightSource::fixed: return "fixed";
    case WeightSource::estimated: return "estimated";
    case WeightSource::oracle: return "oracle";
  }
  return "unknown";
}

double mu_hat(const MatrixXd& cov) { return trace_star(cov); }

MatrixXd shrink_matrix(const MatrixXd& cov, double W, double mu) {
  if (!(W >= 0.0 && W <= 1.0)) throw std::invalid_argument("shrink_matrix: W must lie in [0, 1]");
  if (cov.rows() != cov.cols()) throw std::invalid_argument("shrink_matrix: matrix not square");
  MatrixXd out = (1.0 - W) * cov;
  out.diagonal().array() += W * mu;
  return out;
}

MatrixXd true_shrunk(const MatrixXd& sigma, double W) { return shrink_matrix(sigma, W, trace_star(sigma)); }

OracleWeight w_star_oracle(const CoefficientScheme& scheme, const InnovationSpec& innov, Index n) {
  innov.validate();
  if (n < 1) throw std::invalid_argument("w_star_oracle: n must be positive");
  const MatrixXd& c = scheme.coefficients();
  const Index J = scheme.horizon();
  const double d = static_cast<double>(scheme.dim());
  const double s2 = innov.sigma_sq;
  const double k4 = innov.cumulant4();

  // sum_{i,j} Gamma^{(i,j)}(tau), with autocovariance C(tau) = Cov(Y_0, Y_tau):
  //   gaussian part  tr(C)^2 + <C, C'>,  cumulant part  k4 sum_k (c_k . c_{k+tau})^2.
  auto summed_gamma = [&](Index tau) {
    const Index len = J + 1 - tau;
    const MatrixXd cov = s2 * (c.topRows(len).transpose() * c.bottomRows(len));
    const double tr = cov.trace();
    double g = tr * tr + cov.cwiseProduct(cov.transpose()).sum();
    if (k4 != 0.0) g += k4 * c.topRows(len).cwiseProduct(c.bottomRows(len)).rowwise().sum().squaredNorm();
    return g;
  };

  double lrv = summed_gamma(0);
  const Index max_tau = std::min(J, n - 1);
  for (Index tau = 1; tau <= max_tau; ++tau)
    lrv += 2.0 * (1.0 - static_cast<double>(tau) / static_cast<double>(n)) * summed_gamma(tau);

  OracleWeight out;
  out.numerator = lrv / (static_cast<double>(n) * d);
  const MatrixXd sigma = true_covariance(scheme, innov);
  MatrixXd gap = -sigma;
  gap.diagonal().array() += trace_star(sigma);
  out.denominator = frobenius_star_sq(gap) + out.numerator;
  out.W_star = out.denominator > 0.0 ? std::clamp(out.numerator / out.denominator, 0.0, 1.0) : 1.0;
  return out;
}

EstimatedWeight w_star_hat(const MatrixXd& y, const KernelSpec& kernel) {
  const double n = static_cast<double>(y.rows());
  const double d = static_cast<double>(y.cols());
  const MatrixXd cov = sample_cov(y).matrix;
  EstimatedWeight out;
  out.numerator = std::max(0.0, sum_sigma_hat_sq(y, kernel) / (n * d));
  MatrixXd gap = -cov;
  gap.diagonal().array() += trace_star(cov);
  out.denominator = frobenius_star_sq(gap);
  if (out.denominator == 0.0) {
    out.raw = 1.0;
    out.W_hat = 1.0;
  } else {
    out.raw = out.numerator / out.denominator;
    out.W_hat = std::clamp(out.raw, 0.0, 1.0);
  }
  return out;
}

ShrinkageResult shrink_estimate(const MatrixXd& y, const KernelSpec& kernel) {
  const EstimatedWeight w = w_star_hat(y, kernel);
  ShrinkageResult r = shrink_with_weight(y, w.W_hat, WeightSource::estimated);
  r.raw_W = w.raw;
  r.numerator = w.numerator;
  r.denominator = w.denominator;
  return r;
}

ShrinkageResult shrink_with_weight(const MatrixXd& y, double W, WeightSource source) {
  const MatrixXd cov = sample_cov(y).matrix;
  ShrinkageResult r;
  r.mu_hat = mu_hat(cov);
  r.sigma_s = shrink_matrix(cov, W, r.mu_hat);
  r.W_used = W;
  r.raw_W = W;
  r.W_source = source;
  return r;
}

OracleComparison compare_oracle(const MatrixXd& sample_cov, const MatrixXd& sigma, const WeightVector& v,
                                const WeightVector& w, double W_hat, double W_star) {
  if (sample_cov.rows() != sigma.rows() || sample_cov.cols() != sigma.cols())
    throw std::invalid_argument("compare_oracle: dimension mismatch");
  const double mu = mu_hat(sample_cov);
  const MatrixXd estimated = shrink_matrix(sample_cov, W_hat, mu);
  OracleComparison out;
  out.W_hat = W_hat;
  out.W_star = W_star;
  out.delta_hat_vs_oraclehat = pseudometric(estimated, shrink_matrix(sample_cov, W_star, mu), v, w);
  out.delta_hat_vs_pop_oracle = pseudometric(estimated, true_shrunk(sigma, W_star), v, w);
  return out;
}

OracleComparison compare_oracle(const MatrixXd& y, const MatrixXd& sigma, const WeightVector& v,
                                const WeightVector& w, const KernelSpec& kernel, double W_star) {
  return compare_oracle(sample_cov(y).matrix, sigma, v, w, w_star_hat(y, kernel).W_hat, W_star);
}

}  // namespace hdcov
