#pragma once

#include "hidimcov/model.hpp"
#include "hidimcov/weights.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hdcov {

/// joint: one (d+1)-dimensional Brownian motion, every covariance divided by d+1.
/// two_block: scalar block for the bilinear form (variance alpha^2) and a
/// d-block for the unit forms (covariance beta(i,j)/d), cross-covariance
/// beta(v,w,e_j,e_j)/sqrt(d).
enum class Construction { joint, two_block };

std::string to_string(Construction c);
Construction construction_from_string(const std::string& name);

struct LimitModel {
  Construction construction = Construction::two_block;
  double alpha_sq = 0.0;
  MatrixXd beta;   // d x d, beta(i, j) over unit pairs
  VectorXd cross;  // beta(v, w, e_j, e_j)
  double vw_inner = 0.0;
  Index d = 0;
  MatrixXd covariance;  // (d+1) x (d+1); index 0 is the bilinear form
  MatrixXd factor;      // lower triangular, factor * factor' = covariance + jitter
  double jitter = 0.0;
};

/// Assembles the covariance and factorizes it, escalating diagonal jitter
/// through {0, 1e-12, 1e-10, 1e-8} * trace/d; throws FactorizationError beyond.
LimitModel assemble_limit_model(Construction construction, double alpha_sq, MatrixXd beta, VectorXd cross,
                                double vw_inner);

LimitModel build_limit_model(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
                             const WeightVector& w, Construction construction, Index lag_horizon = -1);

struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// reps paths on t_grid; each path is a grid.size() x (d+1) matrix with X(0) = 0
/// when t_grid starts at 0. Replication r uses a generator derived from (seed, r).
std::vector<MatrixXd> sample_paths(const LimitModel& model, const std::vector<double>& t_grid, Index reps,
                                   std::uint64_t seed, unsigned workers = 1);

/// X(1) for each replication (reps x (d+1)); same draws as sample_paths on {0, 1}.
MatrixXd sample_endpoints(const LimitModel& model, Index reps, std::uint64_t seed, unsigned workers = 1);

/// (1 - W) B_0 + W (v'w) d^{-1/2} sum_j B_j.
double shrink_functional(const LimitModel& model, const VectorXd& endpoint, double W);

/// Var of shrink_functional at t = 1 split into its three terms.
struct ShrinkVarianceTerms {
  double nonparametric = 0.0;  // (1-W)^2 Var(B_0)
  double target = 0.0;         // W^2 (v'w)^2 d^{-1} Var(sum_j B_j)
  double cross = 0.0;          // 2 (1-W) W (v'w) d^{-1/2} sum_j Cov(B_0, B_j)
  double total() const { return nonparametric + target + cross; }
  /// target / (nonparametric + target): the target term's part of the two variance terms.
  double target_share() const {
    const double parts = nonparametric + target;
    return parts > 0.0 ? target / parts : 0.0;
  }
};

ShrinkVarianceTerms shrink_functional_variance(const LimitModel& model, double W);

/// d^{-1/2} sum_j B(t)_j; requires the two_block construction (the d-block
/// then carries the unit-pair forms with covariance beta/d).
double trace_limit_functional(const LimitModel& model, const VectorXd& sample);

/// Var at t = 1 of trace_limit_functional, i.e. d^{-2} sum beta(i, j).
double trace_limit_variance(const LimitModel& model);

/// M_m = sum_{k=0}^{m} { f~_{0,0} (eps_k^2 - sigma^2) + eps_k sum_{l=1}^{J} f~_{l,0} eps_{k-l} }
/// for m = 0..length-1.
VectorXd martingale_path(const CoefficientScheme& scheme, const InnovationSpec& innov, const InnovationStream& eps,
                         const WeightVector& v, const WeightVector& w, Index length);

}  // namespace hdcov
