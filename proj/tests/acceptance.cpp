// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "hidimcov/asymvar.hpp"
#include "hidimcov/limit.hpp"
#include "hidimcov/mc.hpp"
#include "hidimcov/spec_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

using namespace hdcov;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

json ar1_model(Index d, double lo, double hi) {
  return {{"kind", "ar1_geometric"}, {"d", d}, {"rho_range", {lo, hi}}, {"J", 512},
          {"innovations", {{"family", "gaussian"}, {"sigma_sq", 1.0}}}};
}

Outcome from_report(const ExperimentReport& r, const std::string& extra = "") {
  std::string detail;
  for (const auto& a : r.assertions) {
    if (!detail.empty()) detail += "; ";
    detail += (a.pass ? "" : "!") + a.name + " " + a.detail;
  }
  if (!extra.empty()) detail += "; " + extra;
  return {r.all_pass() && !r.assertions.empty(), detail};
}

ExperimentReport run(json doc) {
  doc["workers"] = workers();
  return run_experiment(config_from_json(doc));
}

Outcome oracle_equivalence() {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<Index> pick_j(4, 64), pick_d(1, 6);
  std::uniform_real_distribution<double> decay(0.3, 0.9), sigma(0.5, 2.0);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index J = pick_j(gen), d = pick_d(gen);
    const double r = decay(gen);
    MatrixXd c(J + 1, d);
    for (Index j = 0; j <= J; ++j)
      for (Index nu = 0; nu < d; ++nu) c(j, nu) = z(gen) * std::pow(r, static_cast<double>(j));
    const auto scheme = CoefficientScheme::table(c);
    const auto innov = InnovationSpec::gaussian(sigma(gen));
    auto weight = [&] {
      VectorXd x(d);
      for (Index i = 0; i < d; ++i) x[i] = z(gen);
      return WeightVector(x);
    };
    const WeightVector v = weight(), w = weight(), vt = weight(), wt = weight();
    const double b = beta_sq(scheme, innov, v, w, vt, wt);
    const double o = isserlis_lrv_oracle(scheme, innov, v, w, vt, wt, J);
    worst = std::max(worst, std::abs(b - o) / std::max(1.0, std::abs(b)));
  }
  return {worst <= 1e-8, "max |beta - oracle| / max(1, beta) = " + num(worst) + " over 50 draws (tol 1e-8)"};
}

Outcome clt() {
  const ExperimentReport r = run({{"experiment", "clt_check"},
                                  {"model", {{"kind", "ar1_geometric"}, {"d", 1}, {"rho", 0.5}, {"J", 512}}},
                                  {"weights", {{"v", {{"unit", 0}}}, {"w", {{"unit", 0}}}}},
                                  {"n_grid", {4000}},
                                  {"reps", 2000},
                                  {"master_seed", 20240001},
                                  {"thresholds", {{"var_rel_tol", 0.10}, {"ks_max", 0.04}}}});
  const auto& s = r.cells.front().summary;
  return from_report(r, "var=" + num(s.at("variance")) + " vs 160/27=" + num(160.0 / 27.0) + " ks=" + num(s.at("ks")));
}

Outcome coverage() {
  const ExperimentReport r = run({{"experiment", "trace_coverage"},
                                  {"model", ar1_model(20, 0.1, 0.6)},
                                  {"n_grid", {2000}},
                                  {"reps", 2000},
                                  {"level", 0.95},
                                  {"master_seed", 20240002},
                                  {"thresholds", {{"coverage_tol", 0.02}, {"oracle_sigmas", 3.0}}}});
  return from_report(r);
}

Outcome consistency() {
  const ExperimentReport r = run({{"experiment", "beta_consistency"},
                                  {"model", ar1_model(20, 0.1, 0.6)},
                                  {"n_grid", {500, 2000, 8000}},
                                  {"reps", 200},
                                  {"master_seed", 20240003}});
  return from_report(r);
}

// Coordinate nu is an AR(rho) filter delayed by nu lags: Toeplitz covariance rho^|a-b| / (1 - rho^2).
json delayed_ar_model(Index d, double rho, Index J) {
  json rows = json::array();
  for (Index j = 0; j <= J; ++j) {
    json row = json::array();
    for (Index nu = 0; nu < d; ++nu) row.push_back(j >= nu ? std::pow(rho, static_cast<double>(j - nu)) : 0.0);
    rows.push_back(row);
  }
  return {{"kind", "table"}, {"coefficients", rows}};
}

ExperimentReport dominance_run(const json& model) {
  return run({{"experiment", "shrinkage_rate"},
              {"model", model},
              {"cells", {{200, 20}, {20, 20}, {10, 20}}},
              {"reps", 500},
              {"master_seed", 20240004},
              {"thresholds", {{"assert_dominance", true}, {"dominance_se", 2.0},
                              {"assert_slope", false}, {"assert_tracking", false}}}});
}

Outcome dominance() {
  const Outcome main = from_report(dominance_run(delayed_ar_model(20, 0.5, 200)));
  // Shared-stream ar1 coordinates: Sigma is close to rank one and W* is tiny at d/n = 0.1.
  const ExperimentReport shared = dominance_run(ar1_model(20, 0.1, 0.6));
  std::string info;
  for (const auto& c : shared.cells)
    info += " n=" + std::to_string(c.n) + " W*=" + num(c.constants.at("W_star")) + " margin_se=" +
            num(c.summary.at("dominance_margin_se"));
  return {main.pass, "delayed ar(0.5): " + main.detail + "; shared-stream ar1 (informational):" + info};
}

Outcome weight_rate() {
  const ExperimentReport r = run({{"experiment", "shrinkage_rate"},
                                  {"model", ar1_model(10, 0.1, 0.6)},
                                  {"n_grid", {500, 2000, 8000}},
                                  {"d_grid", {10, 20, 40}},
                                  {"reps", 200},
                                  {"master_seed", 20240005},
                                  {"thresholds", {{"assert_dominance", false}, {"assert_slope", true},
                                                  {"assert_tracking", true}, {"tracking_factor", 3.0}}}});
  return from_report(r);
}

Outcome ortho() {
  const ExperimentReport r = run({{"experiment", "ortho_study"},
                                  {"model", ar1_model(2, 0.3, 0.6)},
                                  {"weights", {{"v", {{"unit", 0}}}, {"w", {{"unit", 1}}}}},
                                  {"n_grid", {4000}},
                                  {"d_grid", {16, 64, 256}},
                                  {"W", 0.5},
                                  {"A", 3.0},
                                  {"family_pairs", 32},
                                  {"reps", 4000},
                                  {"master_seed", 20240006},
                                  {"thresholds", {{"var_rel_tol", 0.10}}}});
  std::string regular;
  for (const auto& c : r.cells)
    if (c.label == "regular") regular += " d=" + std::to_string(c.d) + " " + num(c.summary.at("target_share"));
  return from_report(r, "regular-pair shares" + regular);
}

Outcome limit_consistency() {
  const auto model = ar1_model(4, 0.1, 0.4);
  const ModelSpec spec = model_from_json(model);
  const WeightVector v = unit_vector(0, 4);
  const Index reps = 100000;
  const double W = 0.5;
  bool pass = true;
  std::string detail;
  for (Construction c : {Construction::two_block, Construction::joint}) {
    const LimitModel m = build_limit_model(spec.scheme, spec.innov, v, v, c);
    const auto paths = sample_paths(m, {0.0, 0.5, 1.0}, reps, 77, workers());
    MatrixXd x(reps, m.d + 1);
    for (Index r = 0; r < reps; ++r) x.row(r) = paths[static_cast<std::size_t>(r)].row(2);
    const MatrixXd centered = x.rowwise() - x.colwise().mean();
    const MatrixXd emp = centered.transpose() * centered / static_cast<double>(reps - 1);
    double worst = 0.0;
    for (Index i = 0; i <= m.d; ++i)
      for (Index j = 0; j <= m.d; ++j) {
        const double tol = std::max(0.05 * std::abs(m.covariance(i, j)), 0.02);
        worst = std::max(worst, std::abs(emp(i, j) - m.covariance(i, j)) / tol);
      }
    VectorXd f(reps);
    for (Index r = 0; r < reps; ++r) f[r] = shrink_functional(m, x.row(r).transpose(), W);
    const double var = (f.array() - f.mean()).square().sum() / static_cast<double>(reps - 1);
    const double closed = shrink_functional_variance(m, W).total();
    const double rel = std::abs(var - closed) / closed;
    pass = pass && worst <= 1.0 && rel <= 0.05;
    detail += to_string(c) + ": worst entry error/tol=" + num(worst) + " Var(B'(W))=" + num(var) + " closed form=" +
              num(closed) + " rel=" + num(rel) + "; ";
  }
  return {pass, detail};
}

Outcome martingale() {
  const ExperimentReport ar = run({{"experiment", "martingale_gap"},
                                   {"model", {{"kind", "ar1_geometric"}, {"d", 1}, {"rho", 0.5}, {"J", 512}}},
                                   {"n_grid", {500, 4000}},
                                   {"reps", 500},
                                   {"master_seed", 20240009}});
  const ExperimentReport wn = run({{"experiment", "martingale_gap"},
                                   {"model", {{"kind", "white_noise"}, {"d", 1}, {"J", 512}}},
                                   {"n_grid", {500, 4000}},
                                   {"reps", 500},
                                   {"master_seed", 20240010},
                                   {"thresholds", {{"white_noise_tol", 1e-12}}}});
  const Outcome a = from_report(ar), b = from_report(wn);
  return {a.pass && b.pass, "ar1: " + a.detail + "; white noise: " + b.detail};
}

Outcome determinism() {
  const std::vector<json> configs = {
      {{"experiment", "clt_check"}, {"model", ar1_model(3, 0.2, 0.5)}, {"n_grid", {300, 600}}},
      {{"experiment", "trace_coverage"}, {"model", ar1_model(5, 0.2, 0.5)}, {"n_grid", {300}}},
      {{"experiment", "beta_consistency"}, {"model", ar1_model(5, 0.2, 0.5)}, {"n_grid", {200, 400}}},
      {{"experiment", "shrinkage_rate"}, {"model", ar1_model(5, 0.2, 0.5)}, {"n_grid", {100, 300}}},
      {{"experiment", "ortho_study"}, {"model", ar1_model(2, 0.2, 0.5)}, {"n_grid", {300}}, {"d_grid", {8, 16}}},
      {{"experiment", "martingale_gap"}, {"model", ar1_model(1, 0.5, 0.5)}, {"n_grid", {200, 400}}}};
  bool pass = true;
  std::string detail;
  for (json doc : configs) {
    doc["reps"] = 120;
    doc["master_seed"] = 99;
    doc["workers"] = 1;
    const std::string one = run_experiment(config_from_json(doc)).summaries_json().dump();
    doc["workers"] = 3;
    const std::string three = run_experiment(config_from_json(doc)).summaries_json().dump();
    doc["workers"] = 8;
    const std::string eight = run_experiment(config_from_json(doc)).summaries_json().dump();
    const bool same = one == three && one == eight;
    pass = pass && same;
    detail += doc.at("experiment").get<std::string>() + (same ? " identical" : " DIFFERS") + "; ";
  }
  return {pass, "workers 1/3/8: " + detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", oracle_equivalence, 10.0},
      {2, "single-form CLT", clt, 60.0},
      {3, "trace CI coverage", coverage, 600.0},
      {4, "trace variance estimator consistency", consistency, 0.0},
      {5, "shrinkage dominance at oracle weight", dominance, 0.0},
      {6, "weight-estimator rate and oracle tracking", weight_rate, 0.0},
      {7, "near-orthogonal degeneration", ortho, 0.0},
      {8, "limit-model self-consistency", limit_consistency, 0.0},
      {9, "martingale-gap decay", martingale, 0.0},
      {10, "determinism across worker counts", determinism, 0.0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = " [" + num(secs) + " s";
    if (c.budget_seconds > 0.0) {
      timing += ", budget " + num(c.budget_seconds) + " s";
      if (secs > c.budget_seconds) {
        o.pass = false;
        timing += " EXCEEDED";
      }
    }
    timing += "]";
    std::printf("%s criterion %d (%s): %s%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
