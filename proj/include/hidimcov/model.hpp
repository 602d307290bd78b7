#pragma once

#include "hidimcov/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace hdcov {

enum class InnovationFamily { gaussian, student_t, two_point };

/// Distribution of the i.i.d. innovations driving every coordinate.
///
/// All families are symmetric, so E eps^3 = 0. `sigma_sq` is E eps^2; for the
/// two-point family the support is {-sqrt(sigma_sq), +sqrt(sigma_sq)}.
struct InnovationSpec {
  InnovationFamily family = InnovationFamily::gaussian;
  double sigma_sq = 1.0;
  double df = 0.0;           // student_t only
  double delta_margin = 1.0; // moments finite up to order 4 + delta_margin

  static InnovationSpec gaussian(double sigma_sq = 1.0);
  static InnovationSpec student_t(double df, double sigma_sq = 1.0, double delta_margin = 1.0);
  static InnovationSpec two_point(double scale);

  /// E eps^4.
  double gamma4() const;
  /// Fourth cumulant gamma4 - 3 sigma^4 (zero for gaussian).
  double cumulant4() const { return gamma4() - 3.0 * sigma_sq * sigma_sq; }

  void validate() const;
};

std::string to_string(InnovationFamily family);

enum class SchemeKind { white_noise, ar1_geometric, power_decay, table };

std::string to_string(SchemeKind kind);

/// Coefficients c_j^{(nu)} of the causal linear processes
///   Y_i^{(nu)} = sum_{j=0}^{J} c_j^{(nu)} eps_{i-j},
/// materialized as a (J+1) x d matrix (row j, column nu). Immutable value.
class CoefficientScheme {
 public:
  static CoefficientScheme white_noise(Index d, Index J = 512, double theta = 0.25);
  /// c_j^{(nu)} = rho_nu^j.
  static CoefficientScheme ar1_geometric(const VectorXd& rho, Index J = 512, double theta = 0.25);
  /// c_j^{(nu)} = scale_nu (j v 1)^{-(3/4 + theta/2)}.
  static CoefficientScheme power_decay(const VectorXd& scale, double theta, Index J = 512);
  /// Explicit (J+1) x d table.
  static CoefficientScheme table(MatrixXd coefficients, double theta = 0.25);

  SchemeKind kind() const { return kind_; }
  Index dim() const { return coefficients_.cols(); }
  Index horizon() const { return coefficients_.rows() - 1; }
  double theta() const { return theta_; }
  const VectorXd& parameters() const { return parameters_; }

  /// c_j^{(nu)} with 0-based nu; zero beyond the horizon.
  double coef(Index nu, Index j) const;
  const MatrixXd& coefficients() const { return coefficients_; }

  /// FNV-1a digest of kind, theta and coefficient bytes.
  std::string digest() const;

 private:
  CoefficientScheme(SchemeKind kind, MatrixXd coefficients, double theta, VectorXd parameters);

  SchemeKind kind_;
  MatrixXd coefficients_;
  double theta_;
  VectorXd parameters_;
};

struct AssumptionReport {
  double c_bound = 0.0;
  Index worst_j = 1;
  bool pass = true;
};

/// Envelope constant C = max_{1<=j<=J, nu} c_j^{(nu)2} j^{3/2+theta}. The check
/// passes when C is finite and not attained at the truncation horizon (a
/// maximizer at J means the ratio is still growing).
AssumptionReport verify_assumption_a(const CoefficientScheme& scheme);

/// Innovations eps_{-J}, ..., eps_{n-1}; value(k) addresses eps_k.
struct InnovationStream {
  VectorXd values;
  Index offset = 0;  // position of eps_0 in `values`

  double operator()(Index k) const { return values[offset + k]; }
  Index length() const { return values.size() - offset; }
};

InnovationStream draw_innovations(const InnovationSpec& innov, Index n, Index J, std::uint64_t seed);

struct SeriesPanel {
  MatrixXd data;  // n x d, row i = Y_i'
  std::uint64_t seed = 0;
  std::optional<std::string> scheme_digest;

  Index n() const { return data.rows(); }
  Index d() const { return data.cols(); }
};

/// Y_i = sum_{j<=J} c_j eps_{i-j} for i = 0..n-1 from a given stream.
MatrixXd apply_scheme(const CoefficientScheme& scheme, const InnovationStream& eps, Index n);

SeriesPanel simulate(const CoefficientScheme& scheme, const InnovationSpec& innov, Index n,
                     std::uint64_t seed);

/// Same draw as simulate(), also returning the innovation stream.
std::pair<SeriesPanel, InnovationStream> simulate_with_innovations(
    const CoefficientScheme& scheme, const InnovationSpec& innov, Index n, std::uint64_t seed);

/// c_j^{(w)} = sum_nu w_nu c_j^{(nu)}, j = 0..J.
VectorXd projected_coef(const CoefficientScheme& scheme, const VectorXd& w);

/// Sigma(nu, mu) = sigma^2 sum_j c_j^{(nu)} c_j^{(mu)}.
MatrixXd true_covariance(const CoefficientScheme& scheme, const InnovationSpec& innov);

}  // namespace hdcov
