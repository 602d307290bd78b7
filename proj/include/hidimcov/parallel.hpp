#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>

namespace hdcov {

/// splitmix64 finalizer; used to derive independent generator seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for replication `rep` of cell `cell` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t rep);

inline std::mt19937_64 make_generator(std::uint64_t seed) {
  return std::mt19937_64(mix_seed(seed));
}

/// Runs fn(i) for i in [0, count) on `workers` threads. Callers write results
/// into preallocated slots indexed by i, so output never depends on scheduling.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

/// Default worker count: HIDIMCOV_WORKERS if set and positive, else 1.
unsigned default_workers();

/// Pairwise (cascade) summation with a fixed reduction tree.
double pairwise_sum(std::span<const double> values);

}  // namespace hdcov
