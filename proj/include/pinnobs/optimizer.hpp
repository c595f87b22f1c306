#pragma once

#include <vector>

#include "pinnobs/network.hpp"

namespace pinnobs {

enum class LrProfile { mms, raster };

/// Learning-rate multiplier at a (0-based) iteration.
/// mms profile: 1.0 below 500, 0.5 on [500, 750), 0.25 afterwards.
/// raster profile: halves at every configured milestone.
double lr_schedule(LrProfile profile, long iteration,
                   const std::vector<long>& raster_milestones = {5000, 10000, 15000});

/// Adam first/second moment accumulators in canonical slot order.
struct OptimizerState {
  std::vector<Eigen::MatrixXd> m, v;
  long step = 0;
  double base_lr = 5e-4;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  static OptimizerState like(const NetworkParams& params, double base_lr);
};

/// One Adam update of the parameters in place; the learning rate is
/// base_lr * lr_multiplier. Throws on non-finite gradients.
void adam_step(OptimizerState& state, NetworkParams& params, const ParamGrads& grads,
               double lr_multiplier);

}  // namespace pinnobs
