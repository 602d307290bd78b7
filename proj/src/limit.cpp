#include "hidimcov/limit.hpp"

#include "hidimcov/asymvar.hpp"
#include "hidimcov/parallel.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>
#include <stdexcept>

namespace hdcov {

std::string to_string(Construction c) { return c == Construction::joint ? "joint" : "two_block"; }

Construction construction_from_string(const std::string& name) {
  if (name == "joint") return Construction::joint;
  if (name == "two_block") return Construction::two_block;
  throw std::invalid_argument("unknown limit construction '" + name + "'");
}

LimitModel assemble_limit_model(Construction construction, double alpha_sq, MatrixXd beta, VectorXd cross,
                                double vw_inner) {
  const Index d = beta.rows();
  if (d < 1 || beta.cols() != d || cross.size() != d) throw std::invalid_argument("limit model: dimension mismatch");
  LimitModel m;
  m.construction = construction;
  m.alpha_sq = alpha_sq;
  m.beta = std::move(beta);
  m.cross = std::move(cross);
  m.vw_inner = vw_inner;
  m.d = d;
  m.covariance.resize(d + 1, d + 1);
  const double dd = static_cast<double>(d);
  if (construction == Construction::joint) {
    const double s = 1.0 / (dd + 1.0);
    m.covariance(0, 0) = s * alpha_sq;
    m.covariance.block(1, 0, d, 1) = s * m.cross;
    m.covariance.block(0, 1, 1, d) = s * m.cross.transpose();
    m.covariance.bottomRightCorner(d, d) = s * m.beta;
  } else {
    m.covariance(0, 0) = alpha_sq;
    m.covariance.block(1, 0, d, 1) = m.cross / std::sqrt(dd);
    m.covariance.block(0, 1, 1, d) = m.cross.transpose() / std::sqrt(dd);
    m.covariance.bottomRightCorner(d, d) = m.beta / dd;
  }
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();

  const double scale = std::max(m.covariance.trace() / static_cast<double>(d + 1), 1e-300);
  for (double rel : {0.0, 1e-12, 1e-10, 1e-8}) {
    MatrixXd jittered = m.covariance;
    jittered.diagonal().array() += rel * scale;
    Eigen::LLT<MatrixXd> llt(jittered);
    if (llt.info() == Eigen::Success) {
      m.factor = llt.matrixL();
      m.jitter = rel * scale;
      return m;
    }
  }
  throw FactorizationError("limit model: covariance not positive semidefinite after maximal jitter");
}

LimitModel build_limit_model(const CoefficientScheme& scheme, const InnovationSpec& innov, const WeightVector& v,
                             const WeightVector& w, Construction construction, Index lag_horizon) {
  const AsymCovKernel unit = beta_matrix(scheme, innov, unit_pairs(scheme.dim()), lag_horizon);
  return assemble_limit_model(construction, alpha_sq(scheme, innov, v, w, lag_horizon), unit.beta,
                              cross_beta(scheme, innov, v, w, lag_horizon), inner(v, w));
}

std::vector<MatrixXd> sample_paths(const LimitModel& model, const std::vector<double>& t_grid, Index reps,
                                   std::uint64_t seed, unsigned workers) {
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] >= 0.0 && t_grid[k] <= 1.0)) throw std::invalid_argument("sample_paths: grid outside [0, 1]");
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("sample_paths: grid not increasing");
  }
  if (reps < 0) throw std::invalid_argument("sample_paths: negative reps");
  const Index dim = model.d + 1;
  std::vector<MatrixXd> paths(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t r) {
    auto gen = make_generator(derive_seed(seed, 0, r));
    std::normal_distribution<double> normal;
    MatrixXd path(static_cast<Index>(t_grid.size()), dim);
    VectorXd x = VectorXd::Zero(dim);
    VectorXd z(dim);
    double t_prev = 0.0;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      const double dt = t_grid[k] - t_prev;
      for (Index i = 0; i < dim; ++i) z[i] = normal(gen);
      if (dt > 0.0) x.noalias() += std::sqrt(dt) * (model.factor * z);
      path.row(static_cast<Index>(k)) = x.transpose();
      t_prev = t_grid[k];
    }
    paths[r] = std::move(path);
  });
  return paths;
}

MatrixXd sample_endpoints(const LimitModel& model, Index reps, std::uint64_t seed, unsigned workers) {
  const auto paths = sample_paths(model, {0.0, 1.0}, reps, seed, workers);
  MatrixXd out(reps, model.d + 1);
  for (Index r = 0; r < reps; ++r) out.row(r) = paths[static_cast<std::size_t>(r)].row(1);
  return out;
}

double shrink_functional(const LimitModel& model, const VectorXd& endpoint, double W) {
  if (!(W >= 0.0 && W <= 1.0)) throw std::invalid_argument("shrink_functional: W must lie in [0, 1]");
  if (endpoint.size() != model.d + 1) throw std::invalid_argument("shrink_functional: dimension mismatch");
  const double target = endpoint.tail(model.d).sum() / std::sqrt(static_cast<double>(model.d));
  return (1.0 - W) * endpoint[0] + W * model.vw_inner * target;
}

ShrinkVarianceTerms shrink_functional_variance(const LimitModel& model, double W) {
  if (!(W >= 0.0 && W <= 1.0)) throw std::invalid_argument("shrink_functional_variance: W must lie in [0, 1]");
  const double dd = static_cast<double>(model.d);
  const MatrixXd& c = model.covariance;
  ShrinkVarianceTerms t;
  t.nonparametric = (1.0 - W) * (1.0 - W) * c(0, 0);
  t.target = W * W * model.vw_inner * model.vw_inner * c.bottomRightCorner(model.d, model.d).sum() / dd;
  t.cross = 2.0 * (1.0 - W) * W * model.vw_inner * c.block(1, 0, model.d, 1).sum() / std::sqrt(dd);
  return t;
}

double trace_limit_functional(const LimitModel& model, const VectorXd& sample) {
  if (model.construction != Construction::two_block)
    throw std::invalid_argument("trace_limit_functional: requires the two_block construction");
  if (sample.size() != model.d + 1) throw std::invalid_argument("trace_limit_functional: dimension mismatch");
  return sample.tail(model.d).sum() / std::sqrt(static_cast<double>(model.d));
}

double trace_limit_variance(const LimitModel& model) {
  if (model.construction != Construction::two_block)
    throw std::invalid_argument("trace_limit_variance: requires the two_block construction");
  return model.covariance.bottomRightCorner(model.d, model.d).sum() / static_cast<double>(model.d);
}

VectorXd martingale_path(const CoefficientScheme& scheme, const InnovationSpec& innov, const InnovationStream& eps,
                         const WeightVector& v, const WeightVector& w, Index length) {
  const Index J = scheme.horizon();
  if (eps.offset < J || eps.length() < length) throw std::invalid_argument("martingale_path: stream too short");
  const FTable f = f_tilde_table(scheme, v, w, J);
  VectorXd path(length);
  double running = 0.0;
  for (Index k = 0; k < length; ++k) {
    const double e = eps(k);
    double lagged = 0.0;
    for (Index l = 1; l <= J; ++l) lagged += f.f_tilde_0[l] * eps(k - l);
    running += f.f_tilde_0[0] * (e * e - innov.sigma_sq) + e * lagged;
    path[k] = running;
  }
  return path;
}

}  // namespace hdcov
