#include "hidimcov/spec_io.hpp"

#include "hidimcov/panel_io.hpp"

#include <fstream>
#include <stdexcept>

namespace hdcov {

namespace {

VectorXd per_coordinate(const json& value, Index d, const char* name) {
  if (value.is_number()) return VectorXd::Constant(d, value.get<double>());
  if (!value.is_array()) throw std::invalid_argument(std::string("model: '") + name + "' must be a number or list");
  const auto v = value.get<std::vector<double>>();
  if (static_cast<Index>(v.size()) != d)
    throw std::invalid_argument(std::string("model: '") + name + "' length does not match d");
  return Eigen::Map<const VectorXd>(v.data(), d);
}

Index infer_dim(const json& doc) {
  if (doc.contains("d")) return doc.at("d").get<Index>();
  for (const char* key : {"rho", "scale"})
    if (doc.contains(key) && doc.at(key).is_array()) return static_cast<Index>(doc.at(key).size());
  if (doc.contains("coefficients")) return static_cast<Index>(doc.at("coefficients").at(0).size());
  throw std::invalid_argument("model: dimension 'd' missing");
}

}  // namespace

InnovationSpec innovations_from_json(const json& doc) {
  const std::string family = doc.value("family", "gaussian");
  const json params = doc.value("params", json::object());
  const double sigma_sq = doc.value("sigma_sq", 1.0);
  const double delta = params.value("delta_margin", 1.0);
  if (family == "gaussian") {
    InnovationSpec s = InnovationSpec::gaussian(sigma_sq);
    s.delta_margin = delta;
    return s;
  }
  if (family == "student_t") return InnovationSpec::student_t(params.at("df").get<double>(), sigma_sq, delta);
  if (family == "two_point_symmetric" || family == "two_point") {
    const double scale = params.contains("scale") ? params.at("scale").get<double>() : std::sqrt(sigma_sq);
    if (doc.contains("sigma_sq") && std::abs(scale * scale - sigma_sq) > 1e-12 * sigma_sq)
      throw std::invalid_argument("innovations: two-point scale^2 must equal sigma_sq");
    return InnovationSpec::two_point(scale);
  }
  throw std::invalid_argument("innovations: unknown family '" + family + "'");
}

json to_json(const InnovationSpec& innov) {
  json params = {{"delta_margin", innov.delta_margin}};
  if (innov.family == InnovationFamily::student_t) params["df"] = innov.df;
  if (innov.family == InnovationFamily::two_point) params["scale"] = std::sqrt(innov.sigma_sq);
  return {{"family", to_string(innov.family)}, {"sigma_sq", innov.sigma_sq}, {"gamma4", innov.gamma4()},
          {"params", params}};
}

ModelSpec model_from_json(const json& doc, std::optional<Index> d_override) {
  if (!doc.is_object()) throw std::invalid_argument("model: expected a JSON object");
  const std::string kind = doc.at("kind").get<std::string>();
  const Index J = doc.value("J", Index{512});
  const double theta = doc.value("theta", 0.25);
  const InnovationSpec innov = innovations_from_json(doc.value("innovations", json::object()));

  if (kind == "table") {
    if (d_override) throw std::invalid_argument("model: table schemes have a fixed dimension");
    const auto rows = doc.at("coefficients").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw std::invalid_argument("model: empty coefficient table");
    MatrixXd c(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index j = 0; j < c.rows(); ++j) {
      if (static_cast<Index>(rows[j].size()) != c.cols()) throw std::invalid_argument("model: ragged coefficient table");
      for (Index nu = 0; nu < c.cols(); ++nu) c(j, nu) = rows[j][nu];
    }
    return {CoefficientScheme::table(std::move(c), theta), innov};
  }

  const Index d = d_override.value_or(infer_dim(doc));
  if (kind == "white_noise") return {CoefficientScheme::white_noise(d, J, theta), innov};
  if (kind == "ar1_geometric") {
    VectorXd rho;
    if (doc.contains("rho_range")) {
      const auto range = doc.at("rho_range").get<std::vector<double>>();
      if (range.size() != 2) throw std::invalid_argument("model: rho_range must be [lo, hi]");
      rho = d == 1 ? VectorXd(VectorXd::Constant(1, range[0])) : VectorXd(VectorXd::LinSpaced(d, range[0], range[1]));
    } else {
      rho = per_coordinate(doc.at("rho"), d, "rho");
    }
    return {CoefficientScheme::ar1_geometric(rho, J, theta), innov};
  }
  if (kind == "power_decay")
    return {CoefficientScheme::power_decay(per_coordinate(doc.value("scale", json(1.0)), d, "scale"), theta, J), innov};
  throw std::invalid_argument("model: unknown kind '" + kind + "'");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_atomically(path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

WeightVector weight_from_json(const json& doc, Index d) {
  if (doc.is_array()) {
    const auto v = doc.get<std::vector<double>>();
    if (static_cast<Index>(v.size()) != d) throw std::invalid_argument("weights: dense vector length does not match d");
    return WeightVector(Eigen::Map<const VectorXd>(v.data(), d));
  }
  if (doc.contains("unit")) return unit_vector(doc.at("unit").get<Index>(), d);
  if (doc.contains("dense")) return weight_from_json(doc.at("dense"), d);
  if (doc.contains("support")) {
    const auto support = doc.at("support").get<std::vector<Index>>();
    const auto values = doc.at("values").get<std::vector<double>>();
    return sparse_l1(d, support, values);
  }
  throw std::invalid_argument("weights: expected unit, dense or support/values");
}

json weight_to_json(const WeightVector& w) {
  std::vector<Index> support;
  std::vector<double> values;
  for (Index i = 0; i < w.dim(); ++i)
    if (w[i] != 0.0) {
      support.push_back(i);
      values.push_back(w[i]);
    }
  if (2 * support.size() <= static_cast<std::size_t>(w.dim()))
    return {{"support", support}, {"values", values}, {"l1", w.l1()}, {"l2", w.l2()}};
  return {{"dense", std::vector<double>(w.coords().data(), w.coords().data() + w.dim())}, {"l1", w.l1()}, {"l2", w.l2()}};
}

std::vector<WeightVector> vectors_from_json(const json& doc, Index d) {
  const json& list = doc.is_array() ? doc : doc.at("vectors");
  if (doc.is_object() && doc.contains("d") && doc.at("d").get<Index>() != d)
    throw std::invalid_argument("weights: file dimension does not match the data dimension");
  std::vector<WeightVector> out;
  for (const auto& item : list) out.push_back(weight_from_json(item, d));
  return out;
}

WeightPairSet pairs_from_json(const json& doc, Index d) {
  const auto vectors = vectors_from_json(doc, d);
  std::vector<std::pair<WeightVector, WeightVector>> pairs;
  if (doc.is_object() && doc.contains("pairs")) {
    for (const auto& p : doc.at("pairs")) {
      const auto i = p.at(0).get<std::size_t>(), j = p.at(1).get<std::size_t>();
      if (i >= vectors.size() || j >= vectors.size()) throw std::invalid_argument("weights: pair index out of range");
      pairs.emplace_back(vectors[i], vectors[j]);
    }
  } else {
    for (const auto& v : vectors) pairs.emplace_back(v, v);
  }
  return WeightPairSet(std::move(pairs));
}

KernelSpec KernelChoice::resolve(Index n) const {
  return {window, bandwidth.value_or(default_bandwidth(n))};
}

KernelChoice kernel_from_json(const json& doc) {
  KernelChoice k;
  if (doc.is_null()) return k;
  if (doc.is_string()) {
    k.window = window_from_string(doc.get<std::string>());
    return k;
  }
  k.window = window_from_string(doc.value("window", "bartlett"));
  if (doc.contains("bandwidth")) {
    const json& b = doc.at("bandwidth");
    if (b.is_string()) {
      if (b.get<std::string>() != "auto") throw std::invalid_argument("kernel: bandwidth must be 'auto' or an integer");
    } else {
      k.bandwidth = b.get<Index>();
    }
  }
  return k;
}

json to_json(const KernelChoice& k) {
  return {{"window", to_string(k.window)}, {"bandwidth", k.bandwidth ? json(*k.bandwidth) : json("auto")}};
}

}  // namespace hdcov
