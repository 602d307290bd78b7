#pragma once

#include "hidimcov/lrvest.hpp"
#include "hidimcov/model.hpp"
#include "hidimcov/weights.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace hdcov {

using json = nlohmann::json;

struct ModelSpec {
  CoefficientScheme scheme;
  InnovationSpec innov;
};

/// Model document:
///   {"kind": "ar1_geometric", "d": 20, "J": 512, "theta": 0.25,
///    "rho": 0.5 | [..] , "rho_range": [lo, hi],        (ar1_geometric)
///    "scale": 1.0 | [..],                               (power_decay)
///    "coefficients": [[c_0^(1), .., c_0^(d)], ..],      (table, rows are lags)
///    "innovations": {"family": "gaussian", "sigma_sq": 1, "params": {..}}}
/// d_override replaces "d" (per-coordinate lists must then be absent or match).
ModelSpec model_from_json(const json& doc, std::optional<Index> d_override = std::nullopt);
InnovationSpec innovations_from_json(const json& doc);
json to_json(const InnovationSpec& innov);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

/// {"unit": k} | {"dense": [..]} | {"support": [..], "values": [..]}; indices 0-based.
WeightVector weight_from_json(const json& doc, Index d);
json weight_to_json(const WeightVector& w);

/// Weight family document: {"d": d, "vectors": [..], "pairs": [[i, j], ..]} or a
/// bare array of vectors. Without "pairs", each vector is paired with itself.
WeightPairSet pairs_from_json(const json& doc, Index d);
std::vector<WeightVector> vectors_from_json(const json& doc, Index d);

/// {"window": "bartlett", "bandwidth": "auto" | m}; nullopt bandwidth means auto.
struct KernelChoice {
  Window window = Window::bartlett;
  std::optional<Index> bandwidth;

  KernelSpec resolve(Index n) const;
};

KernelChoice kernel_from_json(const json& doc);
json to_json(const KernelChoice& k);

}  // namespace hdcov
