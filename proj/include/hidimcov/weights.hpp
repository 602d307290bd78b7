#pragma once

#include "hidimcov/types.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hdcov {

/// Projection vector with cached l1 / l2 norms.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(VectorXd coords);

  const VectorXd& coords() const { return coords_; }
  Index dim() const { return coords_.size(); }
  double l1() const { return l1_; }
  double l2() const { return l2_; }
  double operator[](Index i) const { return coords_[i]; }

 private:
  VectorXd coords_;
  double l1_ = 0.0;
  double l2_ = 0.0;
};

/// Ordered (v, w) pairs sharing one dimension, all l1-bounded by `l1_bound`.
struct WeightPairSet {
  std::vector<std::pair<WeightVector, WeightVector>> pairs;
  double l1_bound = 0.0;

  WeightPairSet() = default;
  explicit WeightPairSet(std::vector<std::pair<WeightVector, WeightVector>> p);
  WeightPairSet(std::vector<std::pair<WeightVector, WeightVector>> p, double bound);

  Index size() const { return static_cast<Index>(pairs.size()); }
  Index dim() const { return pairs.empty() ? 0 : pairs.front().first.dim(); }
};

/// e_j with 0-based j.
WeightVector unit_vector(Index j, Index d);

/// (e_j, e_j), j = 0..d-1.
WeightPairSet unit_pairs(Index d);

/// w / d; l1 of the result is at most l2(w) / sqrt(d).
WeightVector l2_rescale(const WeightVector& w);

double inner(const WeightVector& v, const WeightVector& w);
bool is_regular(const WeightVector& v, const WeightVector& w, double c_lower);

/// Largest |v_i' v_j| over i < j.
double coherence(std::span<const WeightVector> vectors);
double coherence(const WeightPairSet& set);

struct NearOrthogonalFamily {
  std::vector<WeightVector> vectors;
  double threshold = 0.0;  // A / sqrt(d)
  double coherence = 0.0;
};

/// m unit vectors with pairwise |inner| <= A d^{-1/2}, by rejection sampling of
/// normalized gaussian draws. Throws std::runtime_error when some vector needs
/// more than max_tries candidates.
NearOrthogonalFamily near_orthogonal_family(Index d, Index m, double A, std::uint64_t seed,
                                            std::int64_t max_tries = 1'000'000);

/// Sparse vector from 0-based support indices.
WeightVector sparse_l1(Index d, std::span<const Index> support, std::span<const double> values);

}  // namespace hdcov
