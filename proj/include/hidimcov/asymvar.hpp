#pragma once

#include "hidimcov/model.hpp"
#include "hidimcov/weights.hpp"

#include <optional>

namespace hdcov {

/// f~_{l,0}(v, w) for l = 0..L_max.
struct FTable {
  VectorXd f_tilde_0;
  Index lag_horizon = 0;
  Index truncation = 0;

  double at(Index l) const { return l <= lag_horizon ? f_tilde_0[l] : 0.0; }
};

FTable f_tilde_table(const CoefficientScheme& scheme, const WeightVector& v, const WeightVector& w,
                     Index lag_horizon);

/// f~_{l,i} = sum_{j >= i} f_{l,j}, where
///   f_{0,j} = (c_j v)(c_j w),  f_{l,j} = (c_j v)(c_{j+l} w) + (c_j w)(c_{j+l} v).
double f_tilde(const CoefficientScheme& scheme, const WeightVector& v, const WeightVector& w, Index l, Index i);

/// Long-run variance of the bilinear form D_n(v, w) / sqrt(n).
double alpha_sq(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
                const WeightVector& w, Index lag_horizon = -1);

/// Long-run covariance of the forms for (v, w) and (vt, wt).
double beta_sq(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
               const WeightVector& w, const WeightVector& vt, const WeightVector& wt, Index lag_horizon = -1);

/// beta_sq from two precomputed tables.
double beta_sq(const FTable& a, const FTable& b, const InnovationSpec& innov);

struct AsymCovKernel {
  std::optional<double> alpha_sq;  // set when the pair set has one member
  MatrixXd beta;
  WeightPairSet pairs;
  double sigma_sq = 1.0;
  double gamma4 = 3.0;
};

AsymCovKernel beta_matrix(const CoefficientScheme& scheme, const InnovationSpec& innov,
                          const WeightPairSet& pairs, Index lag_horizon = -1);

/// beta_sq(v, w, e_j, e_j) for j = 0..d-1.
VectorXd cross_beta(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
                    const WeightVector& w, Index lag_horizon = -1);

/// d^{-2} sum_{j,k} beta(j, k) for a kernel built on (e_j, e_j), j = 0..d-1.
double sigma_tr_sq(const AsymCovKernel& kernel);

/// Brute-force long-run covariance sum_{|tau| <= tau_max} Cov(Y_0(v)Y_0(w), Y_tau(vt)Y_tau(wt))
/// from the gaussian fourth-moment factorization. Gaussian innovations only.
double isserlis_lrv_oracle(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
                           const WeightVector& w, const WeightVector& vt, const WeightVector& wt,
                           Index tau_max);

}  // namespace hdcov
