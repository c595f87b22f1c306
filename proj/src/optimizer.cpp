#include "pinnobs/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace pinnobs {

double lr_schedule(LrProfile profile, long iteration, const std::vector<long>& raster_milestones) {
  if (iteration < 0) throw std::invalid_argument("lr_schedule: negative iteration");
  if (profile == LrProfile::mms) {
    if (iteration < 500) return 1.0;
    if (iteration < 750) return 0.5;
    return 0.25;
  }
  double mult = 1.0;
  for (long ms : raster_milestones)
    if (iteration >= ms) mult *= 0.5;
  return mult;
}

OptimizerState OptimizerState::like(const NetworkParams& params, double lr) {
  OptimizerState s;
  s.base_lr = lr;
  const ParamGrads g = make_param_grads(params);
  s.m = g.slots;
  s.v = g.slots;
  return s;
}

void adam_step(OptimizerState& state, NetworkParams& params, const ParamGrads& grads,
               double lr_multiplier) {
  if (!grads.finite()) throw std::runtime_error("adam_step: non-finite gradient");
  if (grads.slots.size() != state.m.size())
    throw std::invalid_argument("adam_step: gradient/state shape mismatch");
  ++state.step;
  const double lr = state.base_lr * lr_multiplier;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t s = 0; s < grads.slots.size(); ++s) {
    const Eigen::MatrixXd& g = grads.slots[s];
    state.m[s] = state.beta1 * state.m[s] + (1.0 - state.beta1) * g;
    state.v[s] = state.beta2 * state.v[s] + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Eigen::MatrixXd mhat = state.m[s] / bc1;
    const Eigen::MatrixXd vhat = state.v[s] / bc2;
    const Eigen::MatrixXd denom = (vhat.array().sqrt() + state.eps).matrix();
    const Eigen::MatrixXd upd = lr * mhat.cwiseQuotient(denom);
    const size_t layer = s / 2;
    if (s % 2 == 0) {
      params.W[layer] -= upd;
    } else {
      params.b[layer] -= upd.col(0);
    }
  }
}

}  // namespace pinnobs
