#pragma once

#include "hidimcov/linalg.hpp"
#include "hidimcov/types.hpp"
#include "hidimcov/weights.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hdcov {

template <typename Scalar>
struct CovarianceEstimate {
  Matrix<Scalar> matrix;
  Index n_used = 0;
  bool normalized = true;
};

enum class PathScaling { single, multi };

/// Step-function path evaluated on a grid; values has one row per grid point
/// and one column per form.
template <typename Scalar>
struct FormPath {
  std::vector<double> grid;
  Matrix<Scalar> values;
  PathScaling scaling = PathScaling::single;
};

/// floor(n t), robust to t = k/n round-off.
inline Index steps_at(Index n, double t) {
  const double x = static_cast<double>(n) * t;
  const auto k = static_cast<Index>(std::floor(x + 1e-9 * std::max(1.0, x)));
  return std::clamp<Index>(k, 0, n);
}

/// {k/n : k = 0..n}, thinned to at most max_points (endpoints kept).
inline std::vector<double> default_grid(Index n, Index max_points = 2048);

inline void check_grid(const std::vector<double>& grid) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) throw std::invalid_argument("grid point outside [0, 1]");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw std::invalid_argument("grid not increasing");
  }
}

/// Uncentered (1/n) sum_i Y_i Y_i'.
template <typename Derived>
CovarianceEstimate<typename Derived::Scalar> sample_cov(const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  if (y.rows() < 1 || y.cols() < 1) throw std::invalid_argument("sample_cov: empty panel");
  Matrix<Scalar> s = Matrix<Scalar>::Zero(y.cols(), y.cols());
  s.template selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
  s.template triangularView<Eigen::StrictlyUpper>() = s.transpose();
  s /= static_cast<Scalar>(y.rows());
  return {std::move(s), y.rows(), true};
}

/// sum_{i<k} Y_i Y_i' (unnormalized), 0 <= k <= n.
template <typename Derived>
CovarianceEstimate<typename Derived::Scalar> partial_sum_cov(const Eigen::MatrixBase<Derived>& y, Index k) {
  using Scalar = typename Derived::Scalar;
  if (k < 0 || k > y.rows()) throw std::out_of_range("partial_sum_cov: k out of range");
  Matrix<Scalar> s = Matrix<Scalar>::Zero(y.cols(), y.cols());
  if (k > 0) {
    s.template selfadjointView<Eigen::Lower>().rankUpdate(y.topRows(k).transpose());
    s.template triangularView<Eigen::StrictlyUpper>() = s.transpose();
  }
  return {std::move(s), k, false};
}

/// xi_i = (v'Y_i)(w'Y_i) - v' Sigma w.
template <typename Derived, typename SigmaDerived>
Vector<typename Derived::Scalar> xi_terms(const Eigen::MatrixBase<Derived>& y,
                                          const Eigen::MatrixBase<SigmaDerived>& sigma,
                                          const WeightVector& v, const WeightVector& w) {
  using Scalar = typename Derived::Scalar;
  const Index d = y.cols();
  if (sigma.rows() != d || sigma.cols() != d || v.dim() != d || w.dim() != d)
    throw std::invalid_argument("xi_terms: dimension mismatch");
  const Vector<Scalar> vs = v.coords().template cast<Scalar>();
  const Vector<Scalar> ws = w.coords().template cast<Scalar>();
  const Scalar centre = vs.dot(sigma * ws);
  return ((y * vs).array() * (y * ws).array() - centre).matrix();
}

/// D_{n,floor(nt)} / sqrt(n * L) per form and grid point.
template <typename Derived, typename SigmaDerived>
FormPath<typename Derived::Scalar> multi_d_path(const Eigen::MatrixBase<Derived>& y,
                                                const Eigen::MatrixBase<SigmaDerived>& sigma,
                                                const WeightPairSet& pairs, const std::vector<double>& grid) {
  using Scalar = typename Derived::Scalar;
  check_grid(grid);
  const Index n = y.rows();
  const Index L = pairs.size();
  if (L < 1) throw std::invalid_argument("multi_d_path: empty pair set");
  FormPath<Scalar> path;
  path.grid = grid;
  path.scaling = L == 1 ? PathScaling::single : PathScaling::multi;
  path.values.resize(static_cast<Index>(grid.size()), L);
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(n) * static_cast<Scalar>(L));
  for (Index j = 0; j < L; ++j) {
    const auto& [v, w] = pairs.pairs[static_cast<std::size_t>(j)];
    const Vector<Scalar> xi = xi_terms(y, sigma, v, w);
    Scalar running = 0;
    Index consumed = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Index k = steps_at(n, grid[g]);
      for (; consumed < k; ++consumed) running += xi[consumed];
      path.values(static_cast<Index>(g), j) = scale * running;
    }
  }
  return path;
}

/// D_n(t; v, w) = n^{-1/2} v'(S_{floor(nt)} - floor(nt) Sigma) w.
template <typename Derived, typename SigmaDerived>
FormPath<typename Derived::Scalar> d_path(const Eigen::MatrixBase<Derived>& y,
                                          const Eigen::MatrixBase<SigmaDerived>& sigma,
                                          const WeightVector& v, const WeightVector& w,
                                          const std::vector<double>& grid) {
  return multi_d_path(y, sigma, WeightPairSet({{v, w}}), grid);
}

/// n^{-1/2} sum_i xi_i, the t = 1 endpoint of d_path without building a path.
template <typename Derived, typename SigmaDerived>
typename Derived::Scalar d_endpoint(const Eigen::MatrixBase<Derived>& y,
                                    const Eigen::MatrixBase<SigmaDerived>& sigma,
                                    const WeightVector& v, const WeightVector& w) {
  using Scalar = typename Derived::Scalar;
  return xi_terms(y, sigma, v, w).sum() / std::sqrt(static_cast<Scalar>(y.rows()));
}

/// |v'(A - B)w|.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pseudometric(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                       const WeightVector& v, const WeightVector& w) {
  using Scalar = typename DerivedA::Scalar;
  if (a.rows() != b.rows() || a.cols() != b.cols() || v.dim() != a.rows() || w.dim() != a.cols())
    throw std::invalid_argument("pseudometric: dimension mismatch");
  const Vector<Scalar> vs = v.coords().template cast<Scalar>();
  const Vector<Scalar> ws = w.coords().template cast<Scalar>();
  return std::abs(vs.dot((a - b) * ws));
}

/// T_n(t) = sqrt(n) (tr*(Sigma_hat_n(t)) - tr*((floor(nt)/n) Sigma)).
template <typename Derived, typename SigmaDerived>
FormPath<typename Derived::Scalar> trace_process(const Eigen::MatrixBase<Derived>& y,
                                                 const Eigen::MatrixBase<SigmaDerived>& sigma,
                                                 const std::vector<double>& grid) {
  using Scalar = typename Derived::Scalar;
  check_grid(grid);
  const Index n = y.rows(), d = y.cols();
  if (sigma.rows() != d || sigma.cols() != d) throw std::invalid_argument("trace_process: dimension mismatch");
  const Scalar tr = sigma.trace();
  const Vector<Scalar> centered = (y.rowwise().squaredNorm().array() - tr).matrix();
  const Scalar scale = Scalar(1) / (std::sqrt(static_cast<Scalar>(n)) * static_cast<Scalar>(d));
  FormPath<Scalar> path;
  path.grid = grid;
  path.values.resize(static_cast<Index>(grid.size()), 1);
  Scalar running = 0;
  Index consumed = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Index k = steps_at(n, grid[g]);
    for (; consumed < k; ++consumed) running += centered[consumed];
    path.values(static_cast<Index>(g), 0) = scale * running;
  }
  return path;
}

inline std::vector<double> default_grid(Index n, Index max_points) {
  if (n < 1 || max_points < 2) throw std::invalid_argument("default_grid: need n >= 1 and max_points >= 2");
  std::vector<double> grid;
  if (n + 1 <= max_points) {
    for (Index k = 0; k <= n; ++k) grid.push_back(static_cast<double>(k) / static_cast<double>(n));
    return grid;
  }
  Index last = -1;
  for (Index g = 0; g < max_points; ++g) {
    const Index k = (g * n) / (max_points - 1);
    if (k != last) grid.push_back(static_cast<double>(k) / static_cast<double>(n));
    last = k;
  }
  return grid;
}

}  // namespace hdcov
