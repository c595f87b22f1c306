#include "pinnobs/losses.hpp"

#include <cmath>

namespace pinnobs {

void LossWeights::validate(PhysicsMode mode) const {
  if (alpha < 0 || beta < 0 || gamma_w < 0 || delta < 0 || lambda_obs < 0)
    throw std::invalid_argument("LossWeights: weights must be >= 0");
  if (alpha + obstacle_weight(mode) + gamma_w + delta <= 0)
    throw std::invalid_argument("LossWeights: at least one weight must be > 0");
}

LossEngine::LossEngine(const NetworkParams& params, const Problem& problem)
    : params_(&params),
      problem_(&problem),
      jets_(params, JetLayout::full(problem.input_dim)),
      values_(params, JetLayout::value_only()) {}

LossEval LossEngine::evaluate(const CollocationBatch& batch, const LossWeights& weights,
                              ParamGrads* grads) {
  weights.validate(problem_->mode);
  LossEval ev;
  const int dim = problem_->input_dim;
  const double w_obs = weights.obstacle_weight(problem_->mode);
  const bool sia = problem_->mode == PhysicsMode::sia;

  auto note_bad = [&](double t, double x, double y) {
    ev.finite = false;
    if (ev.bad_points.size() < 8) ev.bad_points.push_back({t, x, y});
  };

  // ---- interior: PDE residual + obstacle term on the same points ----
  {
    Tape& tape = jets_.tape();
    const NodeId out = jets_.run(batch.interior);
    const int n = static_cast<int>(batch.interior.rows());
    pde_sq_.clear();
    obs_sq_.clear();
    for (int i = 0; i < n; ++i) {
      const double t = batch.interior(i, 0);
      const double x = batch.interior(i, 1);
      const double y = dim == 3 ? batch.interior(i, 2) : 0.0;
      const JetIds u = extract_jet_ids(tape, out, i, dim);
      NodeId res;
      NodeId viol;
      if (sia) {
        SiaPointTerms terms;
        terms.bed = problem_->bed(x, y);
        terms.atilde = problem_->forcing(t, x, y);
        res = build_residual_sia(tape, u, problem_->sia, terms);
        viol = tape.max0(tape.neg(u.value));  // u >= 0
        if (tape.value(u.value) < 0.0) ++ev.clamp_count;
      } else {
        res = build_residual_parabolic(tape, u, problem_->forcing(t, x, y));
        viol = tape.max0(tape.shift(tape.neg(u.value), problem_->obstacle(x, y)));  // psi - u
      }
      pde_sq_.push_back(tape.square(res));
      obs_sq_.push_back(tape.square(viol));
      if (!std::isfinite(tape.value(pde_sq_.back())) || !std::isfinite(tape.value(obs_sq_.back())))
        note_bad(t, x, y);
    }
    const NodeId mean_pde = tape.mean(pde_sq_);
    const NodeId mean_obs = tape.mean(obs_sq_);
    const NodeId root = tape.add(tape.scale(mean_pde, weights.alpha), tape.scale(mean_obs, w_obs));
    ev.comps.pde = tape.value(mean_pde);
    ev.comps.obstacle = tape.value(mean_obs);
    if (grads && ev.finite) tape.backward(root, *grads);
  }

  // ---- boundary and initial: value-mode mean-square mismatch ----
  auto fit_term = [&](const RowMat& pts, const Eigen::VectorXd& target, double weight) {
    Tape& tape = values_.tape();
    const NodeId out = values_.run(pts);
    const int n = static_cast<int>(pts.rows());
    fit_sq_.clear();
    for (int i = 0; i < n; ++i) {
      const NodeId uval = tape.comp(out, i, 0, 0);
      fit_sq_.push_back(tape.square(tape.shift(uval, -target(i))));
      if (!std::isfinite(tape.value(fit_sq_.back())))
        note_bad(pts(i, 0), pts(i, 1), dim == 3 ? pts(i, 2) : 0.0);
    }
    const NodeId m = tape.mean(fit_sq_);
    if (grads && ev.finite && weight != 0.0) tape.backward(tape.scale(m, weight), *grads);
    return tape.value(m);
  };
  ev.comps.boundary = fit_term(batch.boundary, batch.boundary_target, weights.gamma_w);
  ev.comps.initial = fit_term(batch.initial, batch.initial_target, weights.delta);

  ev.total = weights.alpha * ev.comps.pde + w_obs * ev.comps.obstacle +
             weights.gamma_w * ev.comps.boundary + weights.delta * ev.comps.initial;
  if (!std::isfinite(ev.total)) ev.finite = false;
  return ev;
}

}  // namespace pinnobs
