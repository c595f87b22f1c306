// pinnobs command line: train / sweep / oracle / eval / gen-synthetic.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric abort during
// training (last good checkpoint is saved when an output directory is set).

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pinnobs/config.hpp"
#include "pinnobs/fd_oracle.hpp"

using namespace pinnobs;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << text;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long seed_override = -1;
  int deterministic_override = -1;
  int jobs_override = 0;

  RunConfig load() const {
    RunConfig cfg =
        config_path.empty() ? RunConfig::defaults_for("mms1d") : RunConfig::parse_file(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (deterministic_override >= 0) cfg.deterministic = deterministic_override != 0;
    if (jobs_override > 0) cfg.jobs = jobs_override;
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "run configuration file");
  if (config_required) opt->required();
  cmd->add_option("--out", args.out_dir, "output directory for artifacts");
  cmd->add_option("--seed", args.seed_override, "override the config seed");
  cmd->add_option("--deterministic", args.deterministic_override,
                  "override the deterministic flag (0/1)");
  cmd->add_option("--jobs", args.jobs_override, "parallel sweep runs");
}

int cmd_train(const CommonArgs& args, double emit_grid_t, bool has_emit) {
  const RunConfig cfg = args.load();
  const Problem problem = cfg.make_problem();
  const TrainOptions opts = cfg.train_options(problem.input_dim);
  const std::string out = args.out_dir.empty() ? "." : args.out_dir;
  std::filesystem::create_directories(out);
  write_text(out + "/config_echo.txt", cfg.echo());
  try {
    TrainReport report;
    if (cfg.problem == "raster") {
      auto data = std::make_shared<RasterProblemData>(load_raster_data(cfg.data_dir));
      TwoStageOptions ts = cfg.two_stage_options();
      TwoStageReport two = two_stage_train(problem, *data, ts);
      std::printf("stage1 relative L1 fit: %.6g\n", two.stage1_rel_l1);
      report = std::move(two.stage2);
    } else {
      report = train(problem, opts);
    }
    write_loss_csv(report, out + "/loss.csv");
    save_checkpoint(report.final_params, out + "/checkpoint.txt");
    if (has_emit) {
      if (problem.input_dim == 2) {
        const FDGrid sol = [&] {
          FDGrid g;
          g.nx = 201;
          g.nt = 200;
          g.dx = 1.0 / 200;
          g.dt = problem.time_horizon / 200;
          g.T = problem.time_horizon;
          g.values.resize(g.nt + 1, g.nx);
          RowMat pts(g.nx, 2);
          for (int n = 0; n <= g.nt; ++n) {
            for (int i = 0; i < g.nx; ++i) pts.row(i) << g.t_at(n), g.x_at(i);
            g.values.row(n) = eval_values(report.final_params, pts);
          }
          return g;
        }();
        write_fd_grid(sol, out + "/solution.grid");
      } else {
        RasterGrid tmpl;
        tmpl.nx = 101;
        tmpl.ny = 101;
        const Domain& d = problem.domain;
        const double x0 = d.kind == DomainKind::disk ? d.cx - d.radius : d.x0;
        const double x1 = d.kind == DomainKind::disk ? d.cx + d.radius : d.x1;
        const double y0 = d.kind == DomainKind::disk ? d.cy - d.radius : d.y0;
        const double y1 = d.kind == DomainKind::disk ? d.cy + d.radius : d.y1;
        tmpl.x0 = x0;
        tmpl.y0 = y0;
        tmpl.dx = (x1 - x0) / 100;
        tmpl.dy = (y1 - y0) / 100;
        tmpl.values.setZero(101, 101);
        write_grid(eval_on_grid(report.final_params, tmpl, emit_grid_t), out + "/solution.grid");
      }
    }
    if (!report.rows.empty() && std::isfinite(report.final_l1))
      std::printf("final L1 error: %.6g\n", report.final_l1);
    std::printf("train: wrote %zu iterations to %s\n", report.rows.size(), out.c_str());
    return 0;
  } catch (const TrainAbort& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    save_checkpoint(e.last_good, out + "/checkpoint_lastgood.txt");
    std::fprintf(stderr, "last good checkpoint saved to %s/checkpoint_lastgood.txt\n", out.c_str());
    return kExitNumeric;
  }
}

int cmd_sweep(const CommonArgs& args, const std::string& mu_list, const std::string& p_list) {
  RunConfig cfg = args.load();
  if (!mu_list.empty()) cfg.set("sweep_mu", mu_list);
  if (!p_list.empty()) cfg.set("sweep_p", p_list);
  if (cfg.problem != "raster")
    throw ConfigError("sweep: the mu/p sweep runs on the raster problem");
  const std::string out = args.out_dir.empty() ? "." : args.out_dir;
  std::filesystem::create_directories(out);
  write_text(out + "/config_echo.txt", cfg.echo());

  SweepConfig sc;
  sc.data = std::make_shared<RasterProblemData>(load_raster_data(cfg.data_dir));
  sc.constants = cfg.sia();
  sc.atilde_mode = cfg.atilde;
  sc.two_stage = cfg.two_stage_options();
  sc.jobs = cfg.jobs;
  const SweepResult result = mu_sweep(sc, cfg.sweep_mu, cfg.sweep_p);
  write_sweep_csv(result, out + "/sweep.csv");
  int failed = 0;
  for (const auto& r : result.rows) {
    std::printf("mu=%-10.3g p=%-5.3g l1_at_T=%-12.6g %s%s\n", r.mu, r.p, r.l1_at_T,
                r.status.c_str(), r.best ? " best" : "");
    if (r.status != "ok") ++failed;
  }
  if (failed > 0) std::fprintf(stderr, "warning: %d sweep run(s) failed\n", failed);
  return 0;
}

int cmd_oracle(const CommonArgs& args) {
  const RunConfig cfg = args.load();
  const Problem problem = cfg.make_problem();
  const std::string out = args.out_dir.empty() ? "." : args.out_dir;
  std::filesystem::create_directories(out);
  write_text(out + "/config_echo.txt", cfg.echo());
  const FDGrid grid = solve_obstacle_fd(problem, cfg.oracle_nx, cfg.oracle_nt);
  write_fd_grid(grid, out + "/oracle.grid");
  std::printf("oracle: wrote %dx%d grid to %s/oracle.grid\n", grid.nt + 1, grid.nx, out.c_str());
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& grid_path, double t) {
  const NetworkParams params = load_checkpoint(checkpoint);
  if (params.spec.input_dim == 3) {
    const RasterGrid target = read_grid(grid_path);
    const RasterGrid pred = eval_on_grid(params, target, t);
    std::printf("L1 = %.17g\n", l1_vs(pred, target));
  } else {
    // 1D checkpoints are compared over a space-time grid (rows = time levels)
    const FDGrid target = read_fd_grid(grid_path);
    Eigen::MatrixXd pred(target.nt + 1, target.nx);
    RowMat pts(target.nx, 2);
    for (int n = 0; n <= target.nt; ++n) {
      for (int i = 0; i < target.nx; ++i) pts.row(i) << target.t_at(n), target.x_at(i);
      pred.row(n) = eval_values(params, pts);
    }
    std::printf("L1 = %.17g\n", grid_l1(pred, target.values));
  }
  return 0;
}

int cmd_gen_synthetic(const std::string& out, double mu_star, double p, double gamma, int nx,
                      int ny) {
  const RasterProblemData data = synthetic_raster(mu_star, p, gamma, nx, ny);
  save_raster_data(data, out);
  std::printf("gen-synthetic: wrote %dx%d dataset to %s\n", nx, ny, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pinnobs: neural and finite-difference solvers for parabolic obstacle problems"};
  app.require_subcommand(1);

  CommonArgs train_args, sweep_args, oracle_args;
  double emit_grid_t = 1.0;

  auto* train_cmd = app.add_subcommand("train", "train a network on a configured problem");
  add_common(train_cmd, train_args);
  auto* emit_opt =
      train_cmd->add_option("--emit-grid-t", emit_grid_t, "emit a solution grid at this time");

  auto* sweep_cmd = app.add_subcommand("sweep", "independent trainings over mu (and p) values");
  add_common(sweep_cmd, sweep_args);
  std::string mu_list, p_list;
  sweep_cmd->add_option("--mu-list", mu_list, "comma-separated mu values");
  sweep_cmd->add_option("--p-list", p_list, "comma-separated p values");

  auto* oracle_cmd = app.add_subcommand("oracle", "finite-difference reference solve (1D)");
  add_common(oracle_cmd, oracle_args);

  auto* eval_cmd = app.add_subcommand("eval", "L1 error of a checkpoint against a grid");
  std::string ckpt_path, grid_path;
  double eval_t = 1.0;
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--grid", grid_path, "reference grid file")->required();
  eval_cmd->add_option("--t", eval_t, "evaluation time (2D grids)");

  auto* gen_cmd = app.add_subcommand("gen-synthetic", "write a synthetic raster dataset");
  std::string gen_out = "synthetic";
  double gen_mu = 5e-4, gen_p = 4.0, gen_gamma = 0.2;
  int gen_nx = 128, gen_ny = 128;
  gen_cmd->add_option("--out", gen_out, "output directory");
  gen_cmd->add_option("--mu-star", gen_mu, "generating flux coefficient");
  gen_cmd->add_option("--p", gen_p, "generating Glen exponent");
  gen_cmd->add_option("--gamma", gen_gamma, "generating decay rate");
  gen_cmd->add_option("--nx", gen_nx, "grid columns");
  gen_cmd->add_option("--ny", gen_ny, "grid rows");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(train_args, emit_grid_t, emit_opt->count() > 0);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args, mu_list, p_list);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_args);
    if (eval_cmd->parsed()) return cmd_eval(ckpt_path, grid_path, eval_t);
    if (gen_cmd->parsed()) return cmd_gen_synthetic(gen_out, gen_mu, gen_p, gen_gamma, gen_nx, gen_ny);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const TrainAbort& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
