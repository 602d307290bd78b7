#pragma once

#include "hidimcov/types.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hdcov {

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar rel_tol = 1e-12) {
  using Real = typename Derived::RealScalar;
  if (a.rows() != a.cols()) return false;
  const Real scale = std::max<Real>(Real(1), a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

template <typename Scalar>
struct SymmetricEigen {
  Vector<Scalar> values;   // ascending
  Matrix<Scalar> vectors;  // columns match `values`
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Stops once the
/// off-diagonal Frobenius mass drops below tol * ||A||_F.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> jacobi_eigen(const Eigen::MatrixBase<Derived>& input,
                                                      typename Derived::Scalar tol = 1e-12,
                                                      int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  if (input.rows() != input.cols()) throw std::invalid_argument("jacobi_eigen: matrix not square");
  const Index n = input.rows();
  Matrix<Scalar> a = input;
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);
  const Scalar total = a.norm();
  SymmetricEigen<Scalar> out;

  auto off_mass = [&] {
    Scalar s = 0;
    for (Index q = 0; q < n; ++q)
      for (Index p = 0; p < n; ++p)
        if (p != q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  while (total > Scalar(0) && off_mass() > tol * total) {
    if (out.sweeps++ >= max_sweeps) throw std::runtime_error("jacobi_eigen: no convergence");
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> symmetric_eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  if (!is_symmetric(a)) throw std::invalid_argument("symmetric_eigenvalues: matrix not symmetric");
  return jacobi_eigen(a).values;
}

/// d^{-1} tr(A) (equals d^{-1} sum of eigenvalues).
template <typename Derived>
typename Derived::Scalar trace_star(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("trace_star: matrix not square");
  if (a.rows() == 0) throw std::invalid_argument("trace_star: empty matrix");
  return a.trace() / static_cast<typename Derived::Scalar>(a.rows());
}

/// Nuclear norm sum |lambda_i| of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar trace_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("trace_norm: matrix not square");
  if (!is_symmetric(a)) throw std::invalid_argument("trace_norm: matrix not symmetric");
  return jacobi_eigen(a).values.cwiseAbs().sum();
}

/// (d^{-1} sum a_ij^2)^{1/2}.
template <typename Derived>
typename Derived::Scalar frobenius_star(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("frobenius_star: matrix not square");
  return a.norm() / std::sqrt(static_cast<typename Derived::Scalar>(a.rows()));
}

template <typename Derived>
typename Derived::Scalar frobenius_star_sq(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("frobenius_star: matrix not square");
  return a.squaredNorm() / static_cast<typename Derived::Scalar>(a.rows());
}

/// Schatten p-norm (sum sigma_i^p)^{1/p}, p >= 1.
template <typename Derived>
typename Derived::Scalar schatten(const Eigen::MatrixBase<Derived>& a, double p) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw std::invalid_argument("schatten: matrix not square");
  if (!(p >= 1.0)) throw std::invalid_argument("schatten: requires p >= 1");
  const Matrix<Scalar> m = a;
  const Vector<Scalar> sv = Eigen::JacobiSVD<Matrix<Scalar>>(m).singularValues();
  if (std::isinf(p)) return sv.size() ? sv.maxCoeff() : Scalar(0);
  return std::pow(sv.array().pow(Scalar(p)).sum(), Scalar(1.0 / p));
}

}  // namespace hdcov
