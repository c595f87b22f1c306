#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "pinnobs/network.hpp"

namespace pinnobs {

/// Plain raster grid in normalized domain units. Row 0 holds the minimum-y
/// row; values are row-major with nx columns. File format: one header line
///   nx=<int> ny=<int> x0= y0= dx= dy= nodata=
/// followed by ny whitespace-separated rows of nx decimal values (17
/// significant digits, lossless round-trip).
struct RasterGrid {
  int nx = 0, ny = 0;
  double x0 = 0, y0 = 0, dx = 1, dy = 1;
  double nodata = -9999.0;
  Eigen::MatrixXd values;  // ny x nx

  double x_at(int i) const { return x0 + i * dx; }
  double y_at(int j) const { return y0 + j * dy; }
  bool is_nodata(int j, int i) const { return values(j, i) == nodata; }
  bool same_shape(const RasterGrid& o) const {
    return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && dx == o.dx && dy == o.dy;
  }
};

RasterGrid read_grid(const std::string& path);
void write_grid(const RasterGrid& grid, const std::string& path);

/// Bilinear patch sample: value, gradient, and the only nonzero second
/// derivative of a bilinear patch (the mixed one).
struct GridSample {
  double value = 0, gx = 0, gy = 0, hxy = 0;
};

GridSample bilinear_sample(const RasterGrid& grid, double x, double y);

/// Raster dataset for one run of the thickness pipeline. thickness_tT is an
/// evaluation target only and is never used in training.
struct RasterProblemData {
  RasterGrid thickness_t0;
  RasterGrid thickness_tT;
  RasterGrid bed;
  double year0 = 2000, yearT = 2018;  // mapped to t = 0 and t = 1
  bool synthetic = false;
  double mu_star = 0, p = 0, gamma = 0;  // generation constants when synthetic
};

/// Deterministic synthetic stand-in dataset built from the radial
/// manufactured shapes on the disk of diameter 1 embedded in [0,1]^2.
RasterProblemData synthetic_raster(double mu_star, double p, double gamma, int nx, int ny);

void save_raster_data(const RasterProblemData& data, const std::string& dir);
RasterProblemData load_raster_data(const std::string& dir);

/// Network evaluated at every grid point of the template at time t.
RasterGrid eval_on_grid(const NetworkParams& params, const RasterGrid& grid_template, double t);

/// Masked mean absolute difference; cells that are nodata in either grid are
/// excluded. Throws if shapes differ or the mask is empty.
double l1_vs(const RasterGrid& a, const RasterGrid& b);

}  // namespace pinnobs
