#pragma once

#include <memory>
#include <optional>
#include <string>

#include "pinnobs/grid.hpp"
#include "pinnobs/losses.hpp"
#include "pinnobs/optimizer.hpp"

namespace pinnobs {

struct TrainOptions {
  ArchitectureSpec arch;
  LossWeights weights;
  long iterations = 5000;
  std::uint64_t seed = 1;
  BatchSizes batch;
  LrProfile lr_profile = LrProfile::mms;
  double base_lr = 5e-4;
  double init_gain = 1.0;
  std::vector<long> milestones = {5000, 10000, 15000};
  int eval_points = 10000;
  bool deterministic = true;
  std::string config_echo;  // carried into the report verbatim
};

struct TrainRow {
  long iter = 0;  // 1-based
  double total = 0, pde = 0, obstacle = 0, boundary = 0, initial = 0;
  double l1 = std::numeric_limits<double>::quiet_NaN();  // after this iteration's update
};

/// Per-iteration loss records, the trained parameters, and run metadata.
/// Loss columns are the batch losses the gradient was computed from; the l1
/// column is measured after the update, on the fixed evaluation set.
struct TrainReport {
  std::vector<TrainRow> rows;
  NetworkParams final_params;
  double final_l1 = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0;
  long clamp_events = 0;
  std::string config_echo;
};

/// Raised when a loss evaluates non-finite; carries the offending points and
/// the last parameter state that produced a finite loss.
struct TrainAbort : std::runtime_error {
  std::vector<std::array<double, 3>> bad_points;
  NetworkParams last_good;
  TrainAbort(const std::string& msg, std::vector<std::array<double, 3>> pts, NetworkParams params)
      : std::runtime_error(msg), bad_points(std::move(pts)), last_good(std::move(params)) {}
};

TrainReport train(const Problem& problem, const TrainOptions& opts,
                  const NetworkParams* init = nullptr);

void write_loss_csv(const TrainReport& report, const std::string& path);

/// Mean absolute deviation from the exact solution on a fixed seeded
/// space-time evaluation set (the run's L1 error metric).
double l1_error(const NetworkParams& params, const Problem& problem, int eval_points,
                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Raster pipeline
// ---------------------------------------------------------------------------

struct TwoStageOptions {
  TrainOptions stage2;
  long stage1_iterations = 8000;
  double stage1_lr = 1.5e-3;
  double stage1_tol = 1e-3;  // relative L1 fit threshold for the t=0 grid
  int stage1_batch = 2000;
};

struct TwoStageReport {
  NetworkParams stage1_params;
  double stage1_rel_l1 = 0;
  double stage2_first_total = 0;  // total loss at the first stage-2 iteration
  TrainReport stage2;
};

/// Stage 1 fits u(x,y,0) to the t=0 thickness grid with time frozen at 0 (no
/// PDE term); stage 2 continues from those parameters with the full physics
/// loss. Aborts before stage 2 if the stage-1 fit misses its threshold.
TwoStageReport two_stage_train(const Problem& problem, const RasterProblemData& data,
                               const TwoStageOptions& opts);

/// Stage-1 fit only (also used to share one initializer across sweep runs).
NetworkParams stage1_fit(const Problem& problem, const RasterProblemData& data,
                         const TwoStageOptions& opts, double* rel_l1_out);

struct SweepRow {
  double mu = 0, p = 0;
  double l1_at_T = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
  bool best = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int best_index = -1;
};

struct SweepConfig {
  std::shared_ptr<const RasterProblemData> data;
  SIAConstants constants;  // template; mu/p replaced per run
  std::string atilde_mode = "synthetic";
  TwoStageOptions two_stage;
  int jobs = 1;
};

/// One independent training per (mu, p); rows report the masked L1 error
/// between the prediction at t=1 and the target grid. Failures are recorded
/// and the sweep continues; the argmin row is flagged best.
SweepResult mu_sweep(const SweepConfig& config, const std::vector<double>& mu_values,
                     const std::vector<double>& p_values);

void write_sweep_csv(const SweepResult& result, const std::string& path);

}  // namespace pinnobs
