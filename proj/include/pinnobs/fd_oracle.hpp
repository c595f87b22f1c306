#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace pinnobs {

struct Problem;

/// Space-time grid of the 1D finite-difference reference solver.
struct FDGrid {
  int nx = 0, nt = 0;
  double dx = 0, dt = 0;
  double T = 1.0;
  Eigen::MatrixXd values;  // (nt+1) x nx, row n = time n*dt

  double x_at(int i) const { return i * dx; }
  double t_at(int n) const { return n * dt; }
};

/// Implicit-Euler heat step with pointwise projection onto {u >= psi}:
/// each step solves (I - dt D2) u* = u^n + dt f^{n+1} with boundary rows
/// pinned to g, then sets u^{n+1} = max(u*, psi).
FDGrid solve_obstacle_fd(const std::function<double(double)>& psi,
                         const std::function<double(double, double)>& f,   // f(t, x)
                         const std::function<double(double, double)>& g,   // g(t, x)
                         const std::function<double(double)>& u0, int nx, int nt, double T = 1.0);

/// Convenience wrapper pulling the data functions out of a 1D problem.
FDGrid solve_obstacle_fd(const Problem& problem, int nx, int nt);

/// Mean absolute difference over all entries; shapes must match.
double grid_l1(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// FDGrid in the raster grid file format (rows = time levels, dy = dt).
void write_fd_grid(const FDGrid& grid, const std::string& path);
FDGrid read_fd_grid(const std::string& path);

}  // namespace pinnobs
