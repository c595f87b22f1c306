#include "pinnobs/grid.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pinnobs/problems.hpp"

namespace pinnobs {

RasterGrid read_grid(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_grid: cannot open " + path);
  std::string header;
  if (!std::getline(f, header)) throw std::runtime_error("read_grid: empty file " + path);
  RasterGrid g;
  {
    std::istringstream hs(header);
    std::string tok;
    int seen = 0;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("read_grid: malformed header token '" + tok + "'");
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      try {
        if (key == "nx") {
          g.nx = std::stoi(val);
        } else if (key == "ny") {
          g.ny = std::stoi(val);
        } else if (key == "x0") {
          g.x0 = std::stod(val);
        } else if (key == "y0") {
          g.y0 = std::stod(val);
        } else if (key == "dx") {
          g.dx = std::stod(val);
        } else if (key == "dy") {
          g.dy = std::stod(val);
        } else if (key == "nodata") {
          g.nodata = std::stod(val);
        } else {
          throw std::runtime_error("read_grid: unknown header key '" + key + "'");
        }
      } catch (const std::invalid_argument&) {
        throw std::runtime_error("read_grid: non-numeric header value in '" + tok + "'");
      }
      ++seen;
    }
    if (seen != 7) throw std::runtime_error("read_grid: header must carry 7 fields");
  }
  if (g.nx <= 0 || g.ny <= 0) throw std::runtime_error("read_grid: non-positive dimensions");
  if (!(g.dx > 0) || !(g.dy > 0)) throw std::runtime_error("read_grid: non-positive spacing");
  g.values.resize(g.ny, g.nx);
  std::string line;
  for (int j = 0; j < g.ny; ++j) {
    if (!std::getline(f, line)) throw std::runtime_error("read_grid: missing row " + std::to_string(j));
    std::istringstream rs(line);
    std::string cell;
    for (int i = 0; i < g.nx; ++i) {
      if (!(rs >> cell))
        throw std::runtime_error("read_grid: row " + std::to_string(j) + " too short");
      char* end = nullptr;
      g.values(j, i) = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::runtime_error("read_grid: non-numeric cell '" + cell + "'");
    }
    std::string extra;
    if (rs >> extra) throw std::runtime_error("read_grid: row " + std::to_string(j) + " too long");
  }
  return g;
}

void write_grid(const RasterGrid& grid, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_grid: cannot open " + path);
  char buf[192];
  f << "nx=" << grid.nx << " ny=" << grid.ny;
  std::snprintf(buf, sizeof buf, " x0=%.17g y0=%.17g dx=%.17g dy=%.17g nodata=%.17g\n",
                grid.x0, grid.y0, grid.dx, grid.dy, grid.nodata);
  f << buf;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", grid.values(j, i));
      f << buf << (i + 1 == grid.nx ? "" : " ");
    }
    f << "\n";
  }
  if (!f) throw std::runtime_error("write_grid: write failed for " + path);
}

GridSample bilinear_sample(const RasterGrid& grid, double x, double y) {
  const double xmax = grid.x_at(grid.nx - 1);
  const double ymax = grid.y_at(grid.ny - 1);
  const double tol = 1e-12 * (1.0 + std::abs(xmax) + std::abs(ymax));
  if (x < grid.x0 - tol || x > xmax + tol || y < grid.y0 - tol || y > ymax + tol)
    throw std::out_of_range("bilinear_sample: query outside grid extent");
  double fx = (x - grid.x0) / grid.dx;
  double fy = (y - grid.y0) / grid.dy;
  int i = static_cast<int>(std::floor(fx));
  int j = static_cast<int>(std::floor(fy));
  i = std::min(std::max(i, 0), grid.nx - 2);
  j = std::min(std::max(j, 0), grid.ny - 2);
  const double tx = fx - i;
  const double ty = fy - j;
  const double v00 = grid.values(j, i), v10 = grid.values(j, i + 1);
  const double v01 = grid.values(j + 1, i), v11 = grid.values(j + 1, i + 1);
  if (v00 == grid.nodata || v10 == grid.nodata || v01 == grid.nodata || v11 == grid.nodata)
    throw std::runtime_error("bilinear_sample: nodata in interpolation neighborhood");
  GridSample s;
  s.value = v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty) + v01 * (1 - tx) * ty + v11 * tx * ty;
  s.gx = ((v10 - v00) * (1 - ty) + (v11 - v01) * ty) / grid.dx;
  s.gy = ((v01 - v00) * (1 - tx) + (v11 - v10) * tx) / grid.dy;
  s.hxy = (v11 - v10 - v01 + v00) / (grid.dx * grid.dy);
  return s;
}

RasterProblemData synthetic_raster(double mu_star, double p, double gamma, int nx, int ny) {
  if (nx < 16 || ny < 16) throw std::invalid_argument("synthetic_raster: nx, ny >= 16");
  RasterProblemData d;
  d.synthetic = true;
  d.mu_star = mu_star;
  d.p = p;
  d.gamma = gamma;
  auto blank = [&](RasterGrid& g) {
    g.nx = nx;
    g.ny = ny;
    g.x0 = 0;
    g.y0 = 0;
    g.dx = 1.0 / (nx - 1);
    g.dy = 1.0 / (ny - 1);
    g.values.resize(ny, nx);
  };
  blank(d.thickness_t0);
  blank(d.thickness_tT);
  blank(d.bed);
  const double decay = std::exp(-gamma);  // time horizon is 1
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = d.bed.x_at(i), y = d.bed.y_at(j);
      const double rho = 2.0 * std::hypot(x - 0.5, y - 0.5);
      d.bed.values(j, i) = rho <= 1.0 ? sia_bed(rho, p) : 0.0;
      const double u0 = std::max(sia_u0(rho, p), 0.0);
      d.thickness_t0.values(j, i) = u0;
      d.thickness_tT.values(j, i) = u0 * decay;
    }
  }
  return d;
}

void save_raster_data(const RasterProblemData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_grid(data.bed, dir + "/bed.grid");
  write_grid(data.thickness_t0, dir + "/thickness_t0.grid");
  write_grid(data.thickness_tT, dir + "/thickness_tT.grid");
  std::ofstream f(dir + "/dataset.txt");
  if (!f) throw std::runtime_error("save_raster_data: cannot open manifest");
  char buf[96];
  f << "year0=" << data.year0 << "\nyearT=" << data.yearT << "\n";
  f << "synthetic=" << (data.synthetic ? 1 : 0) << "\n";
  std::snprintf(buf, sizeof buf, "mu_star=%.17g\np=%.17g\ngamma=%.17g\n", data.mu_star, data.p,
                data.gamma);
  f << buf;
}

RasterProblemData load_raster_data(const std::string& dir) {
  RasterProblemData d;
  d.bed = read_grid(dir + "/bed.grid");
  d.thickness_t0 = read_grid(dir + "/thickness_t0.grid");
  d.thickness_tT = read_grid(dir + "/thickness_tT.grid");
  std::ifstream f(dir + "/dataset.txt");
  if (!f) throw std::runtime_error("load_raster_data: missing manifest in " + dir);
  std::string line;
  while (std::getline(f, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const double val = std::stod(line.substr(eq + 1));
    if (key == "year0") {
      d.year0 = val;
    } else if (key == "yearT") {
      d.yearT = val;
    } else if (key == "synthetic") {
      d.synthetic = val != 0;
    } else if (key == "mu_star") {
      d.mu_star = val;
    } else if (key == "p") {
      d.p = val;
    } else if (key == "gamma") {
      d.gamma = val;
    } else {
      throw std::runtime_error("load_raster_data: unknown manifest key '" + key + "'");
    }
  }
  if (!d.bed.same_shape(d.thickness_t0) || !d.bed.same_shape(d.thickness_tT))
    throw std::runtime_error("load_raster_data: grids do not share shape/georeference");
  return d;
}

RasterGrid eval_on_grid(const NetworkParams& params, const RasterGrid& grid_template, double t) {
  if (params.spec.input_dim != 3)
    throw std::invalid_argument("eval_on_grid: needs a (t,x,y) network");
  RasterGrid out = grid_template;
  RowMat pts(static_cast<Eigen::Index>(grid_template.nx) * grid_template.ny, 3);
  Eigen::Index r = 0;
  for (int j = 0; j < grid_template.ny; ++j)
    for (int i = 0; i < grid_template.nx; ++i, ++r)
      pts.row(r) << t, grid_template.x_at(i), grid_template.y_at(j);
  const Eigen::VectorXd v = eval_values(params, pts);
  r = 0;
  for (int j = 0; j < grid_template.ny; ++j)
    for (int i = 0; i < grid_template.nx; ++i, ++r) out.values(j, i) = v(r);
  return out;
}

double l1_vs(const RasterGrid& a, const RasterGrid& b) {
  if (a.nx != b.nx || a.ny != b.ny) throw std::invalid_argument("l1_vs: shape mismatch");
  double sum = 0;
  long n = 0;
  for (int j = 0; j < a.ny; ++j) {
    for (int i = 0; i < a.nx; ++i) {
      if (a.is_nodata(j, i) || b.is_nodata(j, i)) continue;
      sum += std::abs(a.values(j, i) - b.values(j, i));
      ++n;
    }
  }
  if (n == 0) throw std::runtime_error("l1_vs: empty mask");
  return sum / static_cast<double>(n);
}

}  // namespace pinnobs
