#pragma once

#include <map>
#include <string>
#include <vector>

#include "pinnobs/train.hpp"

namespace pinnobs {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key=value run configuration. Every key has a documented default
/// (problem-dependent where the experiments differ); unknown keys are
/// rejected by name. parse() applies overrides on top of the defaults for
/// the problem named in the file.
struct RunConfig {
  std::string problem = "mms1d";  // mms1d | mms2d-case1 | mms2d-case2 | sia-mms | raster
  int hidden_layers = 5;
  int width = 128;
  std::string activation = "relu2";
  long iterations = 5000;
  std::uint64_t seed = 1;
  double base_lr = 5e-4;
  double init_gain = 1.0;
  std::string lr_profile = "mms";  // mms | raster
  std::vector<long> lr_milestones = {5000, 10000, 15000};
  int batch_interior = 1000;
  int batch_boundary = 1000;
  int batch_initial = 1000;
  double alpha = 1.0;
  double beta = 4000.0;
  double gamma_w = 1.0;
  double delta = 1.0;
  double lambda_obs = 1e-5;
  double glen_p = 4.0;
  double mu = 1.0;
  double eps_time = 1e-6;
  double eps_phi = 1e-8;
  double delta_flux = 1e-10;
  double decay_gamma = 0.001;
  int eval_points = 10000;
  bool deterministic = true;
  std::string data_dir;
  std::string atilde = "synthetic";  // raster: synthetic | zero
  long stage1_iterations = 8000;
  double stage1_lr = 1.5e-3;
  double stage1_tol = 1e-3;
  int stage1_batch = 2000;
  int oracle_nx = 401;
  int oracle_nt = 2000;
  int jobs = 1;
  std::vector<double> sweep_mu = {5e-6, 5e-5, 5e-4, 5e-3, 5e-2, 5e-1, 1.0, 2.0};
  std::vector<double> sweep_p = {4.0};

  static RunConfig defaults_for(const std::string& problem_id);
  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text);
  void set(const std::string& key, const std::string& value);

  /// Canonical echo: every key materialized, reparseable as a config file.
  std::string echo() const;

  // Mapped views of the configuration
  ArchitectureSpec arch(int input_dim) const;
  LossWeights weights() const;
  SIAConstants sia() const;
  TrainOptions train_options(int input_dim) const;
  TwoStageOptions two_stage_options() const;
  Problem make_problem() const;  // loads raster data from data_dir if needed
};

}  // namespace pinnobs
