#include "hidimcov/weights.hpp"

#include "hidimcov/parallel.hpp"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace hdcov {

WeightVector::WeightVector(VectorXd coords)
    : coords_(std::move(coords)), l1_(coords_.lpNorm<1>()), l2_(coords_.norm()) {}

WeightPairSet::WeightPairSet(std::vector<std::pair<WeightVector, WeightVector>> p)
    : pairs(std::move(p)) {
  for (const auto& [v, w] : pairs) l1_bound = std::max({l1_bound, v.l1(), w.l1()});
  for (const auto& [v, w] : pairs)
    if (v.dim() != dim() || w.dim() != dim()) throw std::invalid_argument("WeightPairSet: dimension mismatch");
}

WeightPairSet::WeightPairSet(std::vector<std::pair<WeightVector, WeightVector>> p, double bound)
    : WeightPairSet(std::move(p)) {
  if (l1_bound > bound * (1.0 + 1e-12))
    throw std::invalid_argument("WeightPairSet: member exceeds l1 bound");
  l1_bound = bound;
}

WeightVector unit_vector(Index j, Index d) {
  if (d < 1 || j < 0 || j >= d) throw std::out_of_range("unit_vector: index out of range");
  return WeightVector(VectorXd::Unit(d, j));
}

WeightPairSet unit_pairs(Index d) {
  std::vector<std::pair<WeightVector, WeightVector>> p;
  p.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) p.emplace_back(unit_vector(j, d), unit_vector(j, d));
  return WeightPairSet(std::move(p));
}

WeightVector l2_rescale(const WeightVector& w) {
  return WeightVector(w.coords() / static_cast<double>(w.dim()));
}

double inner(const WeightVector& v, const WeightVector& w) {
  if (v.dim() != w.dim()) throw std::invalid_argument("inner: dimension mismatch");
  return v.coords().dot(w.coords());
}

bool is_regular(const WeightVector& v, const WeightVector& w, double c_lower) {
  return inner(v, w) >= c_lower;
}

double coherence(std::span<const WeightVector> vectors) {
  if (vectors.size() < 2) throw std::invalid_argument("coherence: need at least two vectors");
  double c = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j) c = std::max(c, std::abs(inner(vectors[i], vectors[j])));
  return c;
}

double coherence(const WeightPairSet& set) {
  std::vector<WeightVector> all;
  for (const auto& [v, w] : set.pairs) {
    all.push_back(v);
    all.push_back(w);
  }
  return coherence(all);
}

NearOrthogonalFamily near_orthogonal_family(Index d, Index m, double A, std::uint64_t seed,
                                            std::int64_t max_tries) {
  if (d < 1 || m < 1) throw std::invalid_argument("near_orthogonal_family: d and m must be positive");
  if (!(A >= 0.5)) throw std::invalid_argument("near_orthogonal_family: requires A >= 1/2");
  NearOrthogonalFamily family;
  family.threshold = A / std::sqrt(static_cast<double>(d));
  auto gen = make_generator(seed);
  std::normal_distribution<double> normal;
  VectorXd candidate(d);
  while (static_cast<Index>(family.vectors.size()) < m) {
    bool accepted = false;
    for (std::int64_t attempt = 0; attempt < max_tries && !accepted; ++attempt) {
      for (Index i = 0; i < d; ++i) candidate[i] = normal(gen);
      const double norm = candidate.norm();
      if (norm == 0.0) continue;
      candidate /= norm;
      accepted = true;
      for (const auto& v : family.vectors) {
        if (std::abs(v.coords().dot(candidate)) > family.threshold) {
          accepted = false;
          break;
        }
      }
    }
    if (!accepted)
      throw std::runtime_error("near_orthogonal_family: rejection sampling exhausted max_tries; m too large for (d, A)");
    family.vectors.emplace_back(candidate);
  }
  family.coherence = family.vectors.size() >= 2 ? coherence(family.vectors) : 0.0;
  return family;
}

WeightVector sparse_l1(Index d, std::span<const Index> support, std::span<const double> values) {
  if (support.size() != values.size()) throw std::invalid_argument("sparse_l1: support/values length mismatch");
  std::set<Index> seen;
  VectorXd coords = VectorXd::Zero(d);
  for (std::size_t k = 0; k < support.size(); ++k) {
    const Index j = support[k];
    if (j < 0 || j >= d) throw std::out_of_range("sparse_l1: index out of range");
    if (!seen.insert(j).second) throw std::invalid_argument("sparse_l1: duplicate support index");
    coords[j] = values[k];
  }
  return WeightVector(std::move(coords));
}

}  // namespace hdcov
