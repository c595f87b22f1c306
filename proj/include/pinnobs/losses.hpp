#pragma once

#include <array>
#include <vector>

#include "pinnobs/network.hpp"
#include "pinnobs/problems.hpp"
#include "pinnobs/sampling.hpp"

namespace pinnobs {

struct LossWeights {
  double alpha = 1.0;    // PDE
  double beta = 4000.0;  // obstacle (sia mode)
  double gamma_w = 1.0;  // boundary
  double delta = 1.0;    // initial
  double lambda_obs = 1e-5;  // obstacle penalty coefficient (linear-parabolic mode)

  double obstacle_weight(PhysicsMode mode) const {
    return mode == PhysicsMode::sia ? beta : lambda_obs;
  }
  void validate(PhysicsMode mode) const;
};

/// Unweighted mean-square components; the total is their weighted sum.
struct LossComponents {
  double pde = 0, obstacle = 0, boundary = 0, initial = 0;
};

struct LossEval {
  LossComponents comps;
  double total = 0;
  bool finite = true;
  std::vector<std::array<double, 3>> bad_points;  // (t, x, y) of non-finite contributions
  long clamp_count = 0;  // interior points whose u < 0 entered SIA power laws
};

/// Loss assembly for one (params, problem) pair. Owns the jet-mode and
/// value-mode tapes, which are rebuilt on every call from a fresh batch.
class LossEngine {
 public:
  LossEngine(const NetworkParams& params, const Problem& problem);

  /// Evaluates components and total; when grads is non-null, accumulates
  /// d(total)/d(theta) into it (caller zeroes beforehand).
  LossEval evaluate(const CollocationBatch& batch, const LossWeights& weights,
                    ParamGrads* grads);

 private:
  const NetworkParams* params_;
  const Problem* problem_;
  NetTape jets_;
  NetTape values_;
  std::vector<NodeId> pde_sq_, obs_sq_, fit_sq_;
};

}  // namespace pinnobs
