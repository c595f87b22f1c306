#include "pinnobs/train.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace pinnobs {

namespace {

enum : std::uint64_t { kStreamInit = 1, kStreamBatch = 2, kStreamEval = 3, kStreamStage1 = 4 };

struct EvalSet {
  RowMat points;
  Eigen::VectorXd exact;
};

EvalSet make_eval_set(const Problem& problem, int n, std::uint64_t seed) {
  EvalSet ev;
  std::mt19937_64 rng(mix_seed(seed, kStreamEval));
  ev.points = sample_spacetime(problem, n, rng);
  ev.exact.resize(n);
  for (int i = 0; i < n; ++i)
    ev.exact(i) = problem.exact(ev.points(i, 0), ev.points(i, 1),
                                problem.input_dim == 3 ? ev.points(i, 2) : 0.0);
  return ev;
}

double eval_l1(const NetworkParams& params, const EvalSet& ev) {
  return (eval_values(params, ev.points) - ev.exact).cwiseAbs().mean();
}

std::string bad_point_list(const std::vector<std::array<double, 3>>& pts) {
  std::string s;
  char buf[96];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, " (t=%g, x=%g, y=%g)", p[0], p[1], p[2]);
    s += buf;
  }
  return s;
}

}  // namespace

double l1_error(const NetworkParams& params, const Problem& problem, int eval_points,
                std::uint64_t seed) {
  if (!problem.has_exact) throw std::invalid_argument("l1_error: problem has no exact solution");
  return eval_l1(params, make_eval_set(problem, eval_points, seed));
}

TrainReport train(const Problem& problem, const TrainOptions& opts, const NetworkParams* init) {
  const auto t_start = std::chrono::steady_clock::now();
  ArchitectureSpec arch = opts.arch;
  arch.input_dim = problem.input_dim;
  NetworkParams params =
      init ? *init : init_params(arch, mix_seed(opts.seed, kStreamInit), opts.init_gain);
  if (init && init->spec.input_dim != problem.input_dim)
    throw std::invalid_argument("train: initial parameters have the wrong input dimension");

  TrainReport report;
  report.config_echo = opts.config_echo;
  report.rows.reserve(static_cast<size_t>(opts.iterations));

  LossEngine engine(params, problem);
  OptimizerState state = OptimizerState::like(params, opts.base_lr);
  ParamGrads grads = make_param_grads(params);
  std::mt19937_64 batch_rng(mix_seed(opts.seed, kStreamBatch));

  EvalSet eval_set;
  if (problem.has_exact && opts.eval_points > 0)
    eval_set = make_eval_set(problem, opts.eval_points, opts.seed);

  NetworkParams last_good = params;
  for (long it = 0; it < opts.iterations; ++it) {
    const CollocationBatch batch = sample_batch(problem, opts.batch, batch_rng);
    grads.set_zero();
    const LossEval ev = engine.evaluate(batch, opts.weights, &grads);
    report.clamp_events += ev.clamp_count;
    if (!ev.finite || !grads.finite()) {
      throw TrainAbort("train: non-finite loss at iteration " + std::to_string(it + 1) + ";" +
                           bad_point_list(ev.bad_points),
                       ev.bad_points, std::move(last_good));
    }
    last_good = params;
    adam_step(state, params, grads, lr_schedule(opts.lr_profile, it, opts.milestones));

    TrainRow row;
    row.iter = it + 1;
    row.total = ev.total;
    row.pde = ev.comps.pde;
    row.obstacle = ev.comps.obstacle;
    row.boundary = ev.comps.boundary;
    row.initial = ev.comps.initial;
    if (eval_set.points.rows() > 0) row.l1 = eval_l1(params, eval_set);
    report.rows.push_back(row);
  }

  report.final_params = std::move(params);
  if (eval_set.points.rows() > 0) {
    report.final_l1 =
        report.rows.empty() ? eval_l1(report.final_params, eval_set) : report.rows.back().l1;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

void write_loss_csv(const TrainReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_loss_csv: cannot open " + path);
  f << "iter,total,pde,obstacle,boundary,initial,l1\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.total,
                  r.pde, r.obstacle, r.boundary, r.initial, r.l1);
    f << buf;
  }
}

// ---------------------------------------------------------------------------
// Two-stage raster pipeline
// ---------------------------------------------------------------------------

NetworkParams stage1_fit(const Problem& problem, const RasterProblemData& data,
                         const TwoStageOptions& opts, double* rel_l1_out) {
  ArchitectureSpec arch = opts.stage2.arch;
  arch.input_dim = 3;
  NetworkParams params =
      init_params(arch, mix_seed(opts.stage2.seed, kStreamInit), opts.stage2.init_gain);
  NetTape values(params, JetLayout::value_only());
  OptimizerState state = OptimizerState::like(params, opts.stage1_lr);
  ParamGrads grads = make_param_grads(params);
  std::mt19937_64 rng(mix_seed(opts.stage2.seed, kStreamStage1));

  const Domain& d = problem.domain;
  std::vector<NodeId> sq;
  RowMat pts(opts.stage1_batch, 3);
  Eigen::VectorXd target(opts.stage1_batch);
  for (long it = 0; it < opts.stage1_iterations; ++it) {
    for (int i = 0; i < opts.stage1_batch; ++i) {
      const double x = d.x0 + uniform01(rng) * (d.x1 - d.x0);
      const double y = d.y0 + uniform01(rng) * (d.y1 - d.y0);
      pts(i, 0) = 0.0;  // time frozen at t = 0
      pts(i, 1) = x;
      pts(i, 2) = y;
      target(i) = bilinear_sample(data.thickness_t0, x, y).value;
    }
    Tape& tape = values.tape();
    const NodeId out = values.run(pts);
    sq.clear();
    for (int i = 0; i < opts.stage1_batch; ++i)
      sq.push_back(tape.square(tape.shift(tape.comp(out, i, 0, 0), -target(i))));
    const NodeId root = tape.mean(sq);
    if (!std::isfinite(tape.value(root)))
      throw TrainAbort("stage1_fit: non-finite fit loss at iteration " + std::to_string(it + 1),
                       {}, params);
    grads.set_zero();
    tape.backward(root, grads);
    adam_step(state, params, grads,
              lr_schedule(LrProfile::raster, it,
                          {opts.stage1_iterations / 2, 5 * opts.stage1_iterations / 8,
                           3 * opts.stage1_iterations / 4, 7 * opts.stage1_iterations / 8}));
  }

  // relative L1 of the fit against the grid at its own nodes
  const RasterGrid fit = eval_on_grid(params, data.thickness_t0, 0.0);
  double num = 0, den = 0;
  for (int j = 0; j < fit.ny; ++j) {
    for (int i = 0; i < fit.nx; ++i) {
      if (data.thickness_t0.is_nodata(j, i)) continue;
      num += std::abs(fit.values(j, i) - data.thickness_t0.values(j, i));
      den += std::abs(data.thickness_t0.values(j, i));
    }
  }
  const double rel = den > 0 ? num / den : std::numeric_limits<double>::infinity();
  if (rel_l1_out) *rel_l1_out = rel;
  return params;
}

TwoStageReport two_stage_train(const Problem& problem, const RasterProblemData& data,
                               const TwoStageOptions& opts) {
  TwoStageReport rep;
  rep.stage1_params = stage1_fit(problem, data, opts, &rep.stage1_rel_l1);
  if (rep.stage1_rel_l1 > opts.stage1_tol)
    throw TrainAbort("two_stage_train: stage-1 fit error " + std::to_string(rep.stage1_rel_l1) +
                         " exceeds threshold " + std::to_string(opts.stage1_tol),
                     {}, rep.stage1_params);
  rep.stage2 = train(problem, opts.stage2, &rep.stage1_params);
  rep.stage2_first_total = rep.stage2.rows.empty() ? 0.0 : rep.stage2.rows.front().total;
  return rep;
}

// ---------------------------------------------------------------------------
// mu / p sweep
// ---------------------------------------------------------------------------

SweepResult mu_sweep(const SweepConfig& config, const std::vector<double>& mu_values,
                     const std::vector<double>& p_values) {
  if (mu_values.empty() || p_values.empty())
    throw std::invalid_argument("mu_sweep: empty value list");
  SweepResult result;
  struct Task {
    double mu, p;
  };
  std::vector<Task> tasks;
  for (double p : p_values)
    for (double mu : mu_values) tasks.push_back({mu, p});
  result.rows.resize(tasks.size());

  // Stage 1 is a pure data fit and does not depend on (mu, p): run it once
  // per p (the architecture seed is shared) and reuse the parameters.
  auto run_task = [&](size_t idx, const NetworkParams* shared_init) {
    const Task& tk = tasks[idx];
    SweepRow row;
    row.mu = tk.mu;
    row.p = tk.p;
    try {
      SIAConstants c = config.constants;
      c.mu = tk.mu;
      c.p = tk.p;
      Problem problem = make_raster_problem(config.data, c, config.atilde_mode);
      TrainReport rep = train(problem, config.two_stage.stage2, shared_init);
      const RasterGrid pred = eval_on_grid(rep.final_params, config.data->thickness_tT, 1.0);
      row.l1_at_T = l1_vs(pred, config.data->thickness_tT);
    } catch (const std::exception&) {
      row.status = "failed";
      row.l1_at_T = std::numeric_limits<double>::quiet_NaN();
    }
    result.rows[idx] = row;
  };

  for (double p : p_values) {
    SIAConstants c = config.constants;
    c.p = p;
    Problem fit_problem = make_raster_problem(config.data, c, config.atilde_mode);
    double rel = 0;
    NetworkParams init = stage1_fit(fit_problem, *config.data, config.two_stage, &rel);
    std::vector<size_t> idxs;
    for (size_t i = 0; i < tasks.size(); ++i)
      if (tasks[i].p == p) idxs.push_back(i);
    if (config.jobs <= 1) {
      for (size_t i : idxs) run_task(i, &init);
    } else {
      std::vector<std::thread> pool;
      std::atomic<size_t> next{0};
      for (int j = 0; j < config.jobs; ++j) {
        pool.emplace_back([&]() {
          for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= idxs.size()) return;
            run_task(idxs[k], &init);
          }
        });
      }
      for (auto& th : pool) th.join();
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < result.rows.size(); ++i) {
    if (result.rows[i].status == "ok" && result.rows[i].l1_at_T < best) {
      best = result.rows[i].l1_at_T;
      result.best_index = static_cast<int>(i);
    }
  }
  if (result.best_index >= 0) result.rows[static_cast<size_t>(result.best_index)].best = true;
  return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_sweep_csv: cannot open " + path);
  f << "mu,p,l1_at_T,status,best\n";
  char buf[160];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s,%d\n", r.mu, r.p, r.l1_at_T,
                  r.status.c_str(), r.best ? 1 : 0);
    f << buf;
  }
}

}  // namespace pinnobs
