#pragma once

#include "hidimcov/spec_io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hdcov {

enum class Experiment { clt_check, trace_coverage, beta_consistency, shrinkage_rate, ortho_study, martingale_gap };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Monte Carlo experiment description (JSON schema 1).
///
/// Cells are the cartesian product n_grid x d_grid unless `cells` lists explicit
/// (n, d) pairs. An empty d_grid keeps the model's own dimension. `thresholds`
/// carries assertion parameters; unset keys take per-experiment defaults.
struct ExperimentConfig {
  Experiment experiment = Experiment::clt_check;
  json model;
  json weights = json::object();  // {"v": .., "w": ..}
  std::vector<Index> n_grid;
  std::vector<Index> d_grid;
  std::vector<std::pair<Index, Index>> cells;
  Index reps = 100;
  KernelChoice kernel;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  double level = 0.95;
  double W = 0.5;
  double A = 3.0;
  Index family_pairs = 32;
  json thresholds = json::object();
  bool record_reps = false;

  void validate() const;
  json to_json() const;
  /// Digest of the configuration excluding `workers`.
  std::string digest() const;
};

ExperimentConfig config_from_json(const json& doc);

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CellResult {
  int cell_id = 0;
  Index n = 0;
  Index d = 0;
  std::string label;
  std::map<std::string, double> constants;  // analytic inputs fixed before sampling
  std::vector<std::string> columns;         // per-replication statistic names
  MatrixXd records;                         // reps x columns
  std::map<std::string, double> summary;
};

struct ExperimentReport {
  Experiment experiment = Experiment::clt_check;
  std::string config_digest;
  json config;
  std::vector<CellResult> cells;
  std::vector<Assertion> assertions;
  double wall_clock_seconds = 0.0;

  bool all_pass() const;
  /// Everything except timing; the object compared for reproducibility.
  json summaries_json() const;
  json to_json() const;
};

/// Recomputes a cell summary from its constants and records.
std::map<std::string, double> aggregate_cell(Experiment experiment, const std::map<std::string, double>& constants,
                                             const std::vector<std::string>& columns, const MatrixXd& records);

ExperimentReport run_experiment(const ExperimentConfig& config);

ExperimentReport run_clt_check(const ExperimentConfig& config);
ExperimentReport run_trace_coverage(const ExperimentConfig& config);
ExperimentReport run_beta_consistency(const ExperimentConfig& config);
ExperimentReport run_shrinkage_rate(const ExperimentConfig& config);
ExperimentReport run_ortho_study(const ExperimentConfig& config);
ExperimentReport run_martingale_gap(const ExperimentConfig& config);

/// Two-sided Kolmogorov-Smirnov distance between the sample and N(0, scale^2).
double ks_statistic(std::span<const double> sample, double scale = 1.0);

/// OLS slope of log(y) on log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

/// report.json (+ reps.csv when records were kept) under `dir`.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir, bool write_records);

/// Parses reps.csv back into per-cell record matrices keyed by cell id.
std::map<int, MatrixXd> read_records_csv(const std::filesystem::path& path, std::vector<std::string>* columns = nullptr);

}  // namespace hdcov
