#include "cli.hpp"

#include "hidimcov/asymvar.hpp"
#include "hidimcov/covest.hpp"
#include "hidimcov/limit.hpp"
#include "hidimcov/linalg.hpp"
#include "hidimcov/lrvest.hpp"
#include "hidimcov/mc.hpp"
#include "hidimcov/panel_io.hpp"
#include "hidimcov/parallel.hpp"
#include "hidimcov/shrink.hpp"
#include "hidimcov/spec_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

namespace hdcov::cli {

namespace {

namespace fs = std::filesystem;

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw std::invalid_argument("expected a nonempty matrix");
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.at(0).size()));
  for (Index i = 0; i < m.rows(); ++i) {
    const auto row = rows.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
    if (static_cast<Index>(row.size()) != m.cols()) throw std::invalid_argument("ragged matrix");
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

void save_matrix(const fs::path& path, const MatrixXd& m) {
  write_atomically(path, [&](std::ostream& os) { write_matrix_csv(os, m); });
}

KernelChoice kernel_choice(const std::string& window, const std::string& bandwidth) {
  KernelChoice k;
  k.window = window_from_string(window);
  if (bandwidth != "auto") {
    std::size_t used = 0;
    const long long m = std::stoll(bandwidth, &used);
    if (used != bandwidth.size() || m < 0) throw std::invalid_argument("--bandwidth must be 'auto' or a nonnegative integer");
    k.bandwidth = static_cast<Index>(m);
  }
  return k;
}

ModelSpec load_model(const std::string& path, std::optional<Index> d, std::optional<Index> J) {
  json doc = read_json_file(path);
  if (J) doc["J"] = *J;
  return model_from_json(doc, d);
}

struct Options {
  std::string scheme, panel, out, weights, model, config, kernel = "bartlett", bandwidth = "auto";
  std::string weight = "estimate", construction = "two_block", kind;
  Index n = 0, lmax = -1, reps = 0, partial = -1, index = 0, m = 2;
  std::optional<Index> d, J;
  std::uint64_t seed = 0;
  double level = 0.95, A = 3.0;
  unsigned workers = 0;
  bool records = false;
  std::vector<Index> support;
  std::vector<double> values;
};

json do_simulate(const Options& o) {
  const ModelSpec model = load_model(o.scheme, o.d, o.J);
  const SeriesPanel panel = simulate(model.scheme, model.innov, o.n, o.seed);
  save_panel(o.out, panel);
  return {{"command", "simulate"}, {"out", o.out}, {"n", panel.n()}, {"d", panel.d()}, {"seed", o.seed},
          {"scheme_digest", *panel.scheme_digest}, {"J", model.scheme.horizon()},
          {"innovations", to_json(model.innov)}};
}

json do_cov(const Options& o) {
  const SeriesPanel panel = load_panel(o.panel);
  const auto est = o.partial >= 0 ? partial_sum_cov(panel.data, o.partial) : sample_cov(panel.data);
  save_matrix(o.out, est.matrix);
  return {{"command", "cov"}, {"out", o.out}, {"n", panel.n()}, {"d", panel.d()}, {"n_used", est.n_used},
          {"normalized", est.normalized}, {"trace_star", trace_star(est.matrix)}};
}

json do_asymvar(const Options& o) {
  const ModelSpec model = load_model(o.scheme, o.d, o.J);
  const Index d = model.scheme.dim();
  const WeightPairSet pairs = o.weights.empty() ? unit_pairs(d) : pairs_from_json(read_json_file(o.weights), d);
  const AsymCovKernel kernel = beta_matrix(model.scheme, model.innov, pairs, o.lmax);
  save_matrix(o.out, kernel.beta);
  json summary = {{"command", "asymvar"}, {"out", o.out}, {"d", d}, {"pairs", pairs.size()},
                  {"lag_horizon", o.lmax < 0 ? model.scheme.horizon() : o.lmax}};
  if (kernel.alpha_sq) summary["alpha_sq"] = *kernel.alpha_sq;
  bool unit = pairs.size() == d;
  for (Index j = 0; unit && j < d; ++j)
    unit = pairs.pairs[j].first.coords() == unit_vector(j, d).coords() &&
           pairs.pairs[j].second.coords() == unit_vector(j, d).coords();
  if (unit) summary["sigma_tr_sq"] = sigma_tr_sq(kernel);
  write_json_file(o.out + ".json", summary);
  return summary;
}

json do_trace_ci(const Options& o) {
  const SeriesPanel panel = load_panel(o.panel);
  const KernelSpec kernel = kernel_choice(o.kernel, o.bandwidth).resolve(panel.n());
  const TraceInterval ci = trace_ci(panel.data, kernel, o.level);
  return {{"command", "trace-ci"}, {"center", ci.center}, {"lo", ci.lo}, {"hi", ci.hi},
          {"sigma_hat", ci.sigma_hat}, {"n", panel.n()}, {"d", panel.d()}, {"bandwidth", kernel.bandwidth},
          {"kernel", to_string(kernel.window)}, {"level", o.level}};
}

json do_shrink(const Options& o) {
  const SeriesPanel panel = load_panel(o.panel);
  const KernelSpec kernel = kernel_choice(o.kernel, o.bandwidth).resolve(panel.n());
  ShrinkageResult result;
  std::optional<OracleWeight> oracle;
  if (o.weight == "estimate") {
    result = shrink_estimate(panel.data, kernel);
  } else if (o.weight.starts_with("fixed:")) {
    std::size_t used = 0;
    const std::string text = o.weight.substr(6);
    const double W = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("--weight fixed:<w> needs a number");
    result = shrink_with_weight(panel.data, W, WeightSource::fixed);
  } else if (o.weight.starts_with("oracle:")) {
    const ModelSpec model = model_from_json(read_json_file(o.weight.substr(7)), panel.d());
    oracle = w_star_oracle(model.scheme, model.innov, panel.n());
    result = shrink_with_weight(panel.data, oracle->W_star, WeightSource::oracle);
    result.raw_W = oracle->W_star;
    result.numerator = oracle->numerator;
    result.denominator = oracle->denominator;
  } else {
    throw std::invalid_argument("--weight must be fixed:<w>, estimate or oracle:<model.json>");
  }
  save_matrix(o.out, result.sigma_s);
  return {{"command", "shrink"}, {"out", o.out}, {"n", panel.n()}, {"d", panel.d()},
          {"W_used", result.W_used}, {"W_source", to_string(result.W_source)}, {"raw_W", result.raw_W},
          {"mu_hat", result.mu_hat}, {"numerator", result.numerator}, {"denominator", result.denominator},
          {"bandwidth", kernel.bandwidth}, {"kernel", to_string(kernel.window)}};
}

json limit_metadata(const LimitModel& model) {
  return {{"construction", to_string(model.construction)}, {"alpha_sq", model.alpha_sq},
          {"vw_inner", model.vw_inner}, {"d", model.d}, {"jitter", model.jitter},
          {"beta", matrix_to_json(model.beta)},
          {"cross", std::vector<double>(model.cross.data(), model.cross.data() + model.cross.size())}};
}

json do_limit_build(const Options& o) {
  const ModelSpec model = load_model(o.scheme, o.d, o.J);
  const Index d = model.scheme.dim();
  const WeightPairSet pairs = o.weights.empty() ? WeightPairSet({{unit_vector(0, d), unit_vector(0, d)}})
                                                : pairs_from_json(read_json_file(o.weights), d);
  if (pairs.size() < 1) throw std::invalid_argument("limit build: weight file has no pairs");
  const auto& [v, w] = pairs.pairs.front();
  const LimitModel limit = build_limit_model(model.scheme, model.innov, v, w, construction_from_string(o.construction),
                                             o.lmax);
  save_matrix(o.out + ".csv", limit.covariance);
  json meta = limit_metadata(limit);
  write_json_file(o.out + ".json", meta);
  meta.erase("beta");
  meta.erase("cross");
  meta["command"] = "limit build";
  meta["out"] = {o.out + ".csv", o.out + ".json"};
  return meta;
}

json do_limit_sample(const Options& o) {
  const json meta = read_json_file(o.model);
  const auto cross = meta.at("cross").get<std::vector<double>>();
  const LimitModel limit = assemble_limit_model(
      construction_from_string(meta.at("construction").get<std::string>()), meta.at("alpha_sq").get<double>(),
      matrix_from_json(meta.at("beta")), Eigen::Map<const VectorXd>(cross.data(), static_cast<Index>(cross.size())),
      meta.at("vw_inner").get<double>());
  const MatrixXd samples = sample_endpoints(limit, o.reps, o.seed, o.workers);
  save_matrix(o.out, samples);
  return {{"command", "limit sample"}, {"out", o.out}, {"reps", o.reps}, {"seed", o.seed},
          {"columns", samples.cols()}, {"jitter", limit.jitter}};
}

json do_weights(const Options& o) {
  if (!o.d || *o.d < 1) throw std::invalid_argument("weights: --d must be positive");
  const Index d = *o.d;
  json doc = {{"d", d}};
  json vectors = json::array();
  if (o.kind == "unit") {
    vectors.push_back(weight_to_json(unit_vector(o.index, d)));
  } else if (o.kind == "unit-pairs") {
    for (Index j = 0; j < d; ++j) vectors.push_back(weight_to_json(unit_vector(j, d)));
  } else if (o.kind == "sparse") {
    vectors.push_back(weight_to_json(sparse_l1(d, o.support, o.values)));
  } else if (o.kind == "near-orth") {
    const NearOrthogonalFamily family = near_orthogonal_family(d, o.m, o.A, o.seed);
    for (const auto& v : family.vectors) vectors.push_back(weight_to_json(v));
    json pairs = json::array();
    for (Index p = 0; p + 1 < o.m; p += 2) pairs.push_back({p, p + 1});
    doc["pairs"] = pairs;
    doc["threshold"] = family.threshold;
    doc["coherence"] = family.coherence;
  } else {
    throw std::invalid_argument("weights: --kind must be unit, unit-pairs, sparse or near-orth");
  }
  doc["vectors"] = vectors;
  write_json_file(o.out, doc);
  return {{"command", "weights"}, {"out", o.out}, {"kind", o.kind}, {"d", d},
          {"count", vectors.size()}};
}

json do_mc_run(const Options& o, int& status) {
  json doc = read_json_file(o.config);
  if (o.workers > 0) doc["workers"] = o.workers;
  if (o.records) doc["record_reps"] = true;
  const ExperimentConfig config = config_from_json(doc);
  const ExperimentReport report = run_experiment(config);
  write_report(report, o.out, config.record_reps);
  std::size_t failed = 0;
  for (const auto& a : report.assertions) failed += a.pass ? 0 : 1;
  status = report.all_pass() ? 0 : 1;
  return {{"command", "mc run"}, {"experiment", to_string(report.experiment)},
          {"config_digest", report.config_digest}, {"out", (fs::path(o.out) / "report.json").string()},
          {"cells", report.cells.size()}, {"assertions", report.assertions.size()}, {"failed", failed},
          {"pass", report.all_pass()}, {"workers", config.workers},
          {"wall_clock_seconds", report.wall_clock_seconds}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Inference tools for high-dimensional covariance matrices of linear processes", "hidimcov"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto* sim = app.add_subcommand("simulate", "Simulate a panel from a model file");
  sim->add_option("--scheme", o.scheme, "model JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--n", o.n, "sample size")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", o.seed, "RNG seed")->required();
  sim->add_option("--out", o.out, "panel file (.csv or binary)")->required();
  sim->add_option("--d", o.d, "override the model dimension");
  sim->add_option("--J", o.J, "override the truncation horizon");

  auto* cov = app.add_subcommand("cov", "Sample covariance of a panel");
  cov->add_option("--panel", o.panel)->required()->check(CLI::ExistingFile);
  cov->add_option("--out", o.out, "CSV output")->required();
  cov->add_option("--partial", o.partial, "unnormalized partial sum over the first k rows");

  auto* asy = app.add_subcommand("asymvar", "Analytic long-run covariance matrix of bilinear forms");
  asy->add_option("--scheme", o.scheme)->required()->check(CLI::ExistingFile);
  asy->add_option("--weights", o.weights, "weight family JSON (default: unit pairs)")->check(CLI::ExistingFile);
  asy->add_option("--lmax", o.lmax, "lag horizon (default J)");
  asy->add_option("--d", o.d);
  asy->add_option("--J", o.J);
  asy->add_option("--out", o.out, "CSV output; a .json sidecar is written next to it")->required();

  auto* tci = app.add_subcommand("trace-ci", "Confidence interval for the normalized trace");
  tci->add_option("--panel", o.panel)->required()->check(CLI::ExistingFile);
  tci->add_option("--kernel", o.kernel)->check(CLI::IsMember({"bartlett", "rectangular", "parzen"}));
  tci->add_option("--bandwidth", o.bandwidth, "auto or lag truncation m");
  tci->add_option("--level", o.level)->check(CLI::Range(0.0, 1.0));

  auto* shr = app.add_subcommand("shrink", "Linear shrinkage towards mu I");
  shr->add_option("--panel", o.panel)->required()->check(CLI::ExistingFile);
  shr->add_option("--kernel", o.kernel)->check(CLI::IsMember({"bartlett", "rectangular", "parzen"}));
  shr->add_option("--bandwidth", o.bandwidth);
  shr->add_option("--weight", o.weight, "fixed:<w> | estimate | oracle:<model.json>");
  shr->add_option("--out", o.out, "CSV output")->required();

  auto* lim = app.add_subcommand("limit", "Gaussian limit models");
  lim->require_subcommand(1);
  auto* lbuild = lim->add_subcommand("build", "Assemble and factorize a limit covariance");
  lbuild->add_option("--scheme", o.scheme)->required()->check(CLI::ExistingFile);
  lbuild->add_option("--weights", o.weights, "first pair supplies (v, w)")->check(CLI::ExistingFile);
  lbuild->add_option("--construction", o.construction)->check(CLI::IsMember({"joint", "two_block"}));
  lbuild->add_option("--lmax", o.lmax);
  lbuild->add_option("--d", o.d);
  lbuild->add_option("--J", o.J);
  lbuild->add_option("--out", o.out, "output prefix (.csv covariance, .json metadata)")->required();
  auto* lsample = lim->add_subcommand("sample", "Draw limit endpoints X(1)");
  lsample->add_option("--model", o.model, "metadata JSON from 'limit build'")->required()->check(CLI::ExistingFile);
  lsample->add_option("--reps", o.reps)->required()->check(CLI::PositiveNumber);
  lsample->add_option("--seed", o.seed)->required();
  lsample->add_option("--workers", o.workers);
  lsample->add_option("--out", o.out)->required();

  auto* mc = app.add_subcommand("mc", "Monte Carlo experiments");
  mc->require_subcommand(1);
  auto* mrun = mc->add_subcommand("run", "Run an experiment config");
  mrun->add_option("--config", o.config)->required()->check(CLI::ExistingFile);
  mrun->add_option("--out", o.out, "report directory")->required();
  mrun->add_option("--workers", o.workers, "worker threads (default HIDIMCOV_WORKERS or 1)");
  mrun->add_flag("--records", o.records, "also write per-replication reps.csv");

  auto* wts = app.add_subcommand("weights", "Generate weight families");
  wts->add_option("--kind", o.kind)->required()->check(CLI::IsMember({"unit", "unit-pairs", "sparse", "near-orth"}));
  wts->add_option("--d", o.d)->required();
  wts->add_option("--index", o.index, "coordinate for --kind unit (0-based)");
  wts->add_option("--support", o.support, "0-based support for --kind sparse");
  wts->add_option("--values", o.values, "values for --kind sparse");
  wts->add_option("--m", o.m, "family size for --kind near-orth");
  wts->add_option("--A", o.A, "coherence constant for --kind near-orth");
  wts->add_option("--seed", o.seed);
  wts->add_option("--out", o.out)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    int status = 0;
    json summary;
    if (*sim) summary = do_simulate(o);
    else if (*cov) summary = do_cov(o);
    else if (*asy) summary = do_asymvar(o);
    else if (*tci) summary = do_trace_ci(o);
    else if (*shr) summary = do_shrink(o);
    else if (*lbuild) summary = do_limit_build(o);
    else if (*lsample) summary = do_limit_sample(o);
    else if (*mrun) summary = do_mc_run(o, status);
    else if (*wts) summary = do_weights(o);
    out << summary.dump() << '\n';
    return status;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace hdcov::cli
