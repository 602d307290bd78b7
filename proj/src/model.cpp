#include "hidimcov/model.hpp"

#include "hidimcov/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>

namespace hdcov {

InnovationSpec InnovationSpec::gaussian(double sigma_sq) {
  InnovationSpec s;
  s.family = InnovationFamily::gaussian;
  s.sigma_sq = sigma_sq;
  s.validate();
  return s;
}

InnovationSpec InnovationSpec::student_t(double df, double sigma_sq, double delta_margin) {
  InnovationSpec s;
  s.family = InnovationFamily::student_t;
  s.df = df;
  s.sigma_sq = sigma_sq;
  s.delta_margin = delta_margin;
  s.validate();
  return s;
}

InnovationSpec InnovationSpec::two_point(double scale) {
  InnovationSpec s;
  s.family = InnovationFamily::two_point;
  s.sigma_sq = scale * scale;
  s.validate();
  return s;
}

double InnovationSpec::gamma4() const {
  const double s4 = sigma_sq * sigma_sq;
  switch (family) {
    case InnovationFamily::gaussian:
      return 3.0 * s4;
    case InnovationFamily::student_t:
      // Standardized t: excess kurtosis 6 / (df - 4).
      return s4 * (3.0 + 6.0 / (df - 4.0));
    case InnovationFamily::two_point:
      return s4;
  }
  return 3.0 * s4;
}

void InnovationSpec::validate() const {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq))
    throw std::invalid_argument("innovations: sigma_sq must be positive and finite");
  if (!(delta_margin > 0.0))
    throw std::invalid_argument("innovations: delta_margin must be positive");
  if (family == InnovationFamily::student_t && !(df > 4.0 + delta_margin))
    throw std::invalid_argument("innovations: student_t requires df > 4 + delta_margin");
}

std::string to_string(InnovationFamily family) {
  switch (family) {
    case InnovationFamily::gaussian: return "gaussian";
    case InnovationFamily::student_t: return "student_t";
    case InnovationFamily::two_point: return "two_point_symmetric";
  }
  return "unknown";
}

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::white_noise: return "white_noise";
    case SchemeKind::ar1_geometric: return "ar1_geometric";
    case SchemeKind::power_decay: return "power_decay";
    case SchemeKind::table: return "table";
  }
  return "unknown";
}

namespace {

void check_common(Index d, Index J, double theta) {
  if (d < 1) throw std::invalid_argument("scheme: dimension must be positive");
  if (J < 1) throw std::invalid_argument("scheme: truncation horizon J must be positive");
  if (!(theta > 0.0 && theta < 0.5)) throw std::invalid_argument("scheme: theta must lie in (0, 1/2)");
}

}  // namespace

CoefficientScheme::CoefficientScheme(SchemeKind kind, MatrixXd coefficients, double theta,
                                     VectorXd parameters)
    : kind_(kind), coefficients_(std::move(coefficients)), theta_(theta), parameters_(std::move(parameters)) {}

CoefficientScheme CoefficientScheme::white_noise(Index d, Index J, double theta) {
  check_common(d, J, theta);
  MatrixXd c = MatrixXd::Zero(J + 1, d);
  c.row(0).setOnes();
  return {SchemeKind::white_noise, std::move(c), theta, VectorXd()};
}

CoefficientScheme CoefficientScheme::ar1_geometric(const VectorXd& rho, Index J, double theta) {
  check_common(rho.size(), J, theta);
  if ((rho.array().abs() >= 1.0).any()) throw std::invalid_argument("scheme: ar1 requires |rho| < 1");
  MatrixXd c(J + 1, rho.size());
  for (Index nu = 0; nu < rho.size(); ++nu) {
    double p = 1.0;
    for (Index j = 0; j <= J; ++j) {
      c(j, nu) = p;
      p *= rho[nu];
    }
  }
  return {SchemeKind::ar1_geometric, std::move(c), theta, rho};
}

CoefficientScheme CoefficientScheme::power_decay(const VectorXd& scale, double theta, Index J) {
  check_common(scale.size(), J, theta);
  const double exponent = 0.75 + 0.5 * theta;
  MatrixXd c(J + 1, scale.size());
  for (Index j = 0; j <= J; ++j) {
    const double env = std::pow(static_cast<double>(std::max<Index>(j, 1)), -exponent);
    c.row(j) = env * scale.transpose();
  }
  return {SchemeKind::power_decay, std::move(c), theta, scale};
}

CoefficientScheme CoefficientScheme::table(MatrixXd coefficients, double theta) {
  check_common(coefficients.cols(), coefficients.rows() - 1, theta);
  if (!coefficients.allFinite()) throw std::invalid_argument("scheme: table has non-finite entries");
  return {SchemeKind::table, std::move(coefficients), theta, VectorXd()};
}

double CoefficientScheme::coef(Index nu, Index j) const {
  if (nu < 0 || nu >= dim()) throw std::out_of_range("coef: coordinate index out of range");
  if (j < 0) throw std::out_of_range("coef: negative lag");
  if (j > horizon()) return 0.0;
  return coefficients_(j, nu);
}

std::string CoefficientScheme::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const int k = static_cast<int>(kind_);
  const std::int64_t rows = coefficients_.rows(), cols = coefficients_.cols();
  feed(&k, sizeof k);
  feed(&theta_, sizeof theta_);
  feed(&rows, sizeof rows);
  feed(&cols, sizeof cols);
  feed(coefficients_.data(), sizeof(double) * static_cast<std::size_t>(coefficients_.size()));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AssumptionReport verify_assumption_a(const CoefficientScheme& scheme) {
  const Index J = scheme.horizon();
  if (J < 2) throw std::invalid_argument("verify_assumption_a: requires J >= 2");
  const double exponent = 1.5 + scheme.theta();
  AssumptionReport report;
  report.c_bound = 0.0;
  report.worst_j = 1;
  const MatrixXd& c = scheme.coefficients();
  for (Index j = 1; j <= J; ++j) {
    const double row_max = c.row(j).array().square().maxCoeff();
    const double ratio = row_max * std::pow(static_cast<double>(j), exponent);
    if (ratio > report.c_bound) {
      report.c_bound = ratio;
      report.worst_j = j;
    }
  }
  report.pass = std::isfinite(report.c_bound) && report.worst_j < J;
  return report;
}

InnovationStream draw_innovations(const InnovationSpec& innov, Index n, Index J, std::uint64_t seed) {
  innov.validate();
  if (n < 1) throw std::invalid_argument("draw_innovations: n must be positive");
  InnovationStream stream;
  stream.values.resize(n + J);
  stream.offset = J;
  auto gen = make_generator(seed);
  const double sd = std::sqrt(innov.sigma_sq);
  switch (innov.family) {
    case InnovationFamily::gaussian: {
      std::normal_distribution<double> dist(0.0, sd);
      for (Index k = 0; k < stream.values.size(); ++k) stream.values[k] = dist(gen);
      break;
    }
    case InnovationFamily::student_t: {
      std::student_t_distribution<double> dist(innov.df);
      const double standardize = sd * std::sqrt((innov.df - 2.0) / innov.df);
      for (Index k = 0; k < stream.values.size(); ++k) stream.values[k] = standardize * dist(gen);
      break;
    }
    case InnovationFamily::two_point: {
      std::bernoulli_distribution coin(0.5);
      for (Index k = 0; k < stream.values.size(); ++k) stream.values[k] = coin(gen) ? sd : -sd;
      break;
    }
  }
  return stream;
}

MatrixXd apply_scheme(const CoefficientScheme& scheme, const InnovationStream& eps, Index n) {
  const Index J = scheme.horizon();
  if (eps.offset < J || eps.length() < n)
    throw std::invalid_argument("apply_scheme: innovation stream too short");
  const MatrixXd& c = scheme.coefficients();
  MatrixXd y(n, scheme.dim());
  // Y = E * C with E(i, j) = eps_{i-j}; formed in row blocks to bound memory.
  constexpr Index block = 512;
  MatrixXd lagged;
  for (Index start = 0; start < n; start += block) {
    const Index rows = std::min(block, n - start);
    lagged.resize(rows, J + 1);
    for (Index r = 0; r < rows; ++r) {
      const Index i = start + r;
      for (Index j = 0; j <= J; ++j) lagged(r, j) = eps(i - j);
    }
    y.middleRows(start, rows).noalias() = lagged * c;
  }
  return y;
}

std::pair<SeriesPanel, InnovationStream> simulate_with_innovations(
    const CoefficientScheme& scheme, const InnovationSpec& innov, Index n, std::uint64_t seed) {
  InnovationStream eps = draw_innovations(innov, n, scheme.horizon(), seed);
  SeriesPanel panel;
  panel.data = apply_scheme(scheme, eps, n);
  panel.seed = seed;
  panel.scheme_digest = scheme.digest();
  return {std::move(panel), std::move(eps)};
}

SeriesPanel simulate(const CoefficientScheme& scheme, const InnovationSpec& innov, Index n,
                     std::uint64_t seed) {
  return simulate_with_innovations(scheme, innov, n, seed).first;
}

VectorXd projected_coef(const CoefficientScheme& scheme, const VectorXd& w) {
  if (w.size() != scheme.dim()) throw std::invalid_argument("projected_coef: dimension mismatch");
  return scheme.coefficients() * w;
}

MatrixXd true_covariance(const CoefficientScheme& scheme, const InnovationSpec& innov) {
  const MatrixXd& c = scheme.coefficients();
  MatrixXd sigma = innov.sigma_sq * (c.transpose() * c);
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace hdcov
