#include "hidimcov/asymvar.hpp"

#include <stdexcept>

namespace hdcov {

namespace {

Index resolve_horizon(const CoefficientScheme& scheme, Index lag_horizon) {
  if (lag_horizon < 0) return scheme.horizon();
  if (lag_horizon < 1) throw std::invalid_argument("asymvar: lag horizon must be >= 1");
  return lag_horizon;
}

void check_dims(const CoefficientScheme& scheme, const WeightVector& v, const WeightVector& w) {
  if (v.dim() != scheme.dim() || w.dim() != scheme.dim())
    throw std::invalid_argument("asymvar: weight dimension does not match scheme");
}

}  // namespace

FTable f_tilde_table(const CoefficientScheme& scheme, const WeightVector& v, const WeightVector& w,
                     Index lag_horizon) {
  check_dims(scheme, v, w);
  const Index L = resolve_horizon(scheme, lag_horizon);
  const Index J = scheme.horizon();
  const VectorXd a = projected_coef(scheme, v.coords());
  const VectorXd b = projected_coef(scheme, w.coords());
  FTable table;
  table.lag_horizon = L;
  table.truncation = J;
  table.f_tilde_0 = VectorXd::Zero(L + 1);
  table.f_tilde_0[0] = a.dot(b);
  for (Index l = 1; l <= std::min(L, J); ++l) {
    const Index len = J + 1 - l;
    table.f_tilde_0[l] = a.head(len).dot(b.segment(l, len)) + b.head(len).dot(a.segment(l, len));
  }
  return table;
}

double f_tilde(const CoefficientScheme& scheme, const WeightVector& v, const WeightVector& w, Index l, Index i) {
  check_dims(scheme, v, w);
  if (l < 0 || i < 0) throw std::invalid_argument("f_tilde: negative index");
  const Index J = scheme.horizon();
  const VectorXd a = projected_coef(scheme, v.coords());
  const VectorXd b = projected_coef(scheme, w.coords());
  double sum = 0.0;
  for (Index j = i; j + l <= J; ++j)
    sum += l == 0 ? a[j] * b[j] : a[j] * b[j + l] + b[j] * a[j + l];
  return sum;
}

// Martingale increment for (v, w):
//   f~_{0,0} (eps_k^2 - sigma^2) + eps_k sum_{l>=1} f~_{l,0} eps_{k-l}.
// With i.i.d. symmetric innovations the two parts are uncorrelated and the
// lagged products are orthogonal across l, so the per-step covariance of two
// increments is
//   f~_{0,0} f~'_{0,0} (gamma4 - sigma^4) + sigma^4 sum_{l>=1} f~_{l,0} f~'_{l,0},
// i.e. the Cesaro block sums divided by their length n'.
double beta_sq(const FTable& a, const FTable& b, const InnovationSpec& innov) {
  const double s4 = innov.sigma_sq * innov.sigma_sq;
  const Index L = std::min(a.lag_horizon, b.lag_horizon);
  const double lagged = a.f_tilde_0.segment(1, L).dot(b.f_tilde_0.segment(1, L));
  return a.f_tilde_0[0] * b.f_tilde_0[0] * (innov.gamma4() - s4) + s4 * lagged;
}

double alpha_sq(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
                const WeightVector& w, Index lag_horizon) {
  const FTable t = f_tilde_table(scheme, v, w, lag_horizon);
  return beta_sq(t, t, innov);
}

double beta_sq(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
               const WeightVector& w, const WeightVector& vt, const WeightVector& wt, Index lag_horizon) {
  return beta_sq(f_tilde_table(scheme, v, w, lag_horizon), f_tilde_table(scheme, vt, wt, lag_horizon), innov);
}

AsymCovKernel beta_matrix(const CoefficientScheme& scheme, const InnovationSpec& innov,
                          const WeightPairSet& pairs, Index lag_horizon) {
  innov.validate();
  const Index L = pairs.size();
  if (L < 1) throw std::invalid_argument("beta_matrix: empty pair set");
  std::vector<FTable> tables;
  tables.reserve(static_cast<std::size_t>(L));
  for (const auto& [v, w] : pairs.pairs) tables.push_back(f_tilde_table(scheme, v, w, lag_horizon));

  AsymCovKernel kernel;
  kernel.pairs = pairs;
  kernel.sigma_sq = innov.sigma_sq;
  kernel.gamma4 = innov.gamma4();
  kernel.beta.resize(L, L);
  // Stack f~_{l,0}, l >= 1, so the lagged part is one Gram product.
  const Index H = tables.front().lag_horizon;
  MatrixXd lagged(H, L);
  VectorXd head(L);
  for (Index j = 0; j < L; ++j) {
    lagged.col(j) = tables[static_cast<std::size_t>(j)].f_tilde_0.segment(1, H);
    head[j] = tables[static_cast<std::size_t>(j)].f_tilde_0[0];
  }
  const double s4 = innov.sigma_sq * innov.sigma_sq;
  kernel.beta = (innov.gamma4() - s4) * head * head.transpose();
  kernel.beta.noalias() += s4 * (lagged.transpose() * lagged);
  kernel.beta = 0.5 * (kernel.beta + kernel.beta.transpose()).eval();
  if (L == 1) kernel.alpha_sq = kernel.beta(0, 0);
  return kernel;
}

VectorXd cross_beta(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
                    const WeightVector& w, Index lag_horizon) {
  const FTable vw = f_tilde_table(scheme, v, w, lag_horizon);
  VectorXd out(scheme.dim());
  for (Index j = 0; j < scheme.dim(); ++j) {
    const WeightVector e = unit_vector(j, scheme.dim());
    out[j] = beta_sq(vw, f_tilde_table(scheme, e, e, lag_horizon), innov);
  }
  return out;
}

double sigma_tr_sq(const AsymCovKernel& kernel) {
  const Index d = kernel.pairs.dim();
  if (kernel.pairs.size() != d) throw std::invalid_argument("sigma_tr_sq: kernel must be built on (e_j, e_j) pairs");
  for (Index j = 0; j < d; ++j) {
    const auto& [v, w] = kernel.pairs.pairs[static_cast<std::size_t>(j)];
    if (v.coords() != VectorXd::Unit(d, j) || w.coords() != VectorXd::Unit(d, j))
      throw std::invalid_argument("sigma_tr_sq: kernel must be built on (e_j, e_j) pairs");
  }
  return kernel.beta.sum() / static_cast<double>(d * d);
}

double isserlis_lrv_oracle(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
                           const WeightVector& w, const WeightVector& vt, const WeightVector& wt,
                           Index tau_max) {
  if (innov.family != InnovationFamily::gaussian)
    throw std::invalid_argument("isserlis_lrv_oracle: gaussian innovations only");
  if (tau_max < 0) throw std::invalid_argument("isserlis_lrv_oracle: tau_max must be >= 0");
  check_dims(scheme, v, w);
  check_dims(scheme, vt, wt);
  const Index J = scheme.horizon();
  const double s2 = innov.sigma_sq;
  const VectorXd pv = projected_coef(scheme, v.coords());
  const VectorXd pw = projected_coef(scheme, w.coords());
  const VectorXd pvt = projected_coef(scheme, vt.coords());
  const VectorXd pwt = projected_coef(scheme, wt.coords());

  // Cov(Y_0(x), Y_tau(y)) = sigma^2 sum_j x_j y_{j+tau}; negative tau shifts x.
  auto acov = [&](const VectorXd& x, const VectorXd& y, Index tau) {
    double s = 0.0;
    for (Index j = 0; j <= J; ++j) {
      const Index jx = tau >= 0 ? j : j - tau;
      const Index jy = tau >= 0 ? j + tau : j;
      if (jx > J || jy > J) break;
      s += x[jx] * y[jy];
    }
    return s2 * s;
  };

  double lrv = 0.0;
  for (Index tau = -tau_max; tau <= tau_max; ++tau)
    lrv += acov(pv, pvt, tau) * acov(pw, pwt, tau) + acov(pv, pwt, tau) * acov(pw, pvt, tau);
  return lrv;
}

}  // namespace hdcov
