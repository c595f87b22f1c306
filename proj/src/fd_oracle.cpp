#include "pinnobs/fd_oracle.hpp"

#include <cassert>
#include <stdexcept>
#include <vector>

#include "pinnobs/grid.hpp"
#include "pinnobs/problems.hpp"

namespace pinnobs {

FDGrid solve_obstacle_fd(const std::function<double(double)>& psi,
                         const std::function<double(double, double)>& f,
                         const std::function<double(double, double)>& g,
                         const std::function<double(double)>& u0, int nx, int nt, double T) {
  if (nx < 3 || nt < 1) throw std::invalid_argument("solve_obstacle_fd: nx >= 3, nt >= 1");
  FDGrid grid;
  grid.nx = nx;
  grid.nt = nt;
  grid.T = T;
  grid.dx = 1.0 / (nx - 1);
  grid.dt = T / nt;
  grid.values.resize(nt + 1, nx);

  std::vector<double> psis(static_cast<size_t>(nx));
  for (int i = 0; i < nx; ++i) psis[static_cast<size_t>(i)] = psi(grid.x_at(i));

  Eigen::VectorXd u(nx);
  for (int i = 0; i < nx; ++i) u(i) = std::max(u0(grid.x_at(i)), psis[static_cast<size_t>(i)]);
  u(0) = g(0.0, 0.0);
  u(nx - 1) = g(0.0, 1.0);
  grid.values.row(0) = u;

  const double r = grid.dt / (grid.dx * grid.dx);
  assert(1.0 + 2.0 * r > 0.0);  // the implicit system is an M-matrix for dt > 0

  // Thomas sweep buffers
  Eigen::VectorXd cp(nx), dp(nx), rhs(nx);
  for (int n = 1; n <= nt; ++n) {
    const double t = grid.t_at(n);
    rhs(0) = g(t, 0.0);
    rhs(nx - 1) = g(t, 1.0);
    for (int i = 1; i < nx - 1; ++i) rhs(i) = u(i) + grid.dt * f(t, grid.x_at(i));

    // rows: [0]: u0 = rhs0; interior: -r u_{i-1} + (1+2r) u_i - r u_{i+1} = rhs_i
    cp(0) = 0.0;
    dp(0) = rhs(0);
    for (int i = 1; i < nx - 1; ++i) {
      const double m = (1.0 + 2.0 * r) - (-r) * cp(i - 1);
      cp(i) = -r / m;
      dp(i) = (rhs(i) - (-r) * dp(i - 1)) / m;
    }
    const double m_last = 1.0;
    dp(nx - 1) = rhs(nx - 1) / m_last;
    cp(nx - 1) = 0.0;

    u(nx - 1) = dp(nx - 1);
    for (int i = nx - 2; i >= 0; --i) u(i) = dp(i) - cp(i) * u(i + 1);

    for (int i = 0; i < nx; ++i) u(i) = std::max(u(i), psis[static_cast<size_t>(i)]);
    u(0) = rhs(0);
    u(nx - 1) = rhs(nx - 1);
    grid.values.row(n) = u;
  }
  return grid;
}

FDGrid solve_obstacle_fd(const Problem& problem, int nx, int nt) {
  if (problem.input_dim != 2)
    throw std::invalid_argument("solve_obstacle_fd: only 1D problems have an oracle");
  return solve_obstacle_fd(
      [&](double x) { return problem.obstacle(x, 0.0); },
      [&](double t, double x) { return problem.forcing(t, x, 0.0); },
      [&](double t, double x) { return problem.boundary_target(t, x, 0.0); },
      [&](double x) { return problem.initial_target(x, 0.0); }, nx, nt, problem.time_horizon);
}

double grid_l1(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("grid_l1: shape mismatch");
  return (a - b).cwiseAbs().mean();
}

void write_fd_grid(const FDGrid& grid, const std::string& path) {
  RasterGrid rg;
  rg.nx = grid.nx;
  rg.ny = grid.nt + 1;
  rg.x0 = 0;
  rg.y0 = 0;
  rg.dx = grid.dx;
  rg.dy = grid.dt;
  rg.values = grid.values;
  write_grid(rg, path);
}

FDGrid read_fd_grid(const std::string& path) {
  const RasterGrid rg = read_grid(path);
  FDGrid grid;
  grid.nx = rg.nx;
  grid.nt = rg.ny - 1;
  grid.dx = rg.dx;
  grid.dt = rg.dy;
  grid.T = grid.dt * grid.nt;
  grid.values = rg.values;
  return grid;
}

}  // namespace pinnobs
