#pragma once

#include <cstdint>
#include <random>

#include "pinnobs/problems.hpp"
#include "pinnobs/tape.hpp"

namespace pinnobs {

struct BatchSizes {
  int interior = 1000;
  int boundary = 1000;
  int initial = 1000;
};

/// Sampled interior/boundary/initial points with their target values.
/// Points are rows of (t, x[, y]); initial rows carry t = 0 exactly.
struct CollocationBatch {
  RowMat interior;
  RowMat boundary;
  Eigen::VectorXd boundary_target;
  RowMat initial;
  Eigen::VectorXd initial_target;
};

/// splitmix64 mix of a seed and a stream tag; all randomness in a run flows
/// from one RunConfig seed through these streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform in [0,1) from the top 53 bits (bit-reproducible everywhere).
double uniform01(std::mt19937_64& rng);

/// Uniform sampling: per-coordinate on intervals/rectangles, by area on
/// disks (r = R sqrt(U)); boundary uniform on the domain boundary; interior
/// samples within 1e-9 of a piecewise breakpoint are rejected and redrawn.
CollocationBatch sample_batch(const Problem& problem, const BatchSizes& sizes,
                              std::mt19937_64& rng);

/// Random space-time points of the domain (no breakpoint rejection); used
/// for fixed evaluation sets.
RowMat sample_spacetime(const Problem& problem, int n, std::mt19937_64& rng);

}  // namespace pinnobs
