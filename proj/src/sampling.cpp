#include "pinnobs/sampling.hpp"

#include <cmath>

namespace pinnobs {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

constexpr double kRejectTol = 1e-9;

bool near_breakpoint(double v, const std::vector<double>& bps) {
  for (double b : bps)
    if (std::abs(v - b) <= kRejectTol) return true;
  return false;
}

// Spatial draw for one interior/initial point; returns coordinates in cols[0..]
void draw_space(const Problem& pr, std::mt19937_64& rng, bool reject, double& x, double& y) {
  const Domain& d = pr.domain;
  for (;;) {
    switch (d.kind) {
      case DomainKind::interval: {
        x = uniform01(rng);
        y = 0.0;
        if (x == 0.0) continue;
        if (reject && near_breakpoint(x, pr.space_breakpoints)) continue;
        return;
      }
      case DomainKind::disk: {
        const double r = d.radius * std::sqrt(uniform01(rng));
        const double th = 2.0 * M_PI * uniform01(rng);
        if (reject && near_breakpoint(r, pr.space_breakpoints)) continue;
        x = d.cx + r * std::cos(th);
        y = d.cy + r * std::sin(th);
        return;
      }
      case DomainKind::rectangle: {
        x = d.x0 + uniform01(rng) * (d.x1 - d.x0);
        y = d.y0 + uniform01(rng) * (d.y1 - d.y0);
        if (x == d.x0 || y == d.y0) continue;
        return;
      }
    }
  }
}

void draw_boundary(const Problem& pr, std::mt19937_64& rng, double& x, double& y) {
  const Domain& d = pr.domain;
  switch (d.kind) {
    case DomainKind::interval:
      x = uniform01(rng) < 0.5 ? 0.0 : 1.0;
      y = 0.0;
      return;
    case DomainKind::disk: {
      const double th = 2.0 * M_PI * uniform01(rng);
      x = d.cx + d.radius * std::cos(th);
      y = d.cy + d.radius * std::sin(th);
      return;
    }
    case DomainKind::rectangle: {
      const double w = d.x1 - d.x0, h = d.y1 - d.y0;
      double s = uniform01(rng) * 2.0 * (w + h);
      if (s < w) {
        x = d.x0 + s;
        y = d.y0;
      } else if (s < w + h) {
        x = d.x1;
        y = d.y0 + (s - w);
      } else if (s < 2.0 * w + h) {
        x = d.x0 + (s - w - h);
        y = d.y1;
      } else {
        x = d.x0;
        y = d.y0 + (s - 2.0 * w - h);
      }
      return;
    }
  }
}

}  // namespace

CollocationBatch sample_batch(const Problem& pr, const BatchSizes& sizes, std::mt19937_64& rng) {
  if (sizes.interior <= 0 || sizes.boundary <= 0 || sizes.initial <= 0)
    throw std::invalid_argument("sample_batch: sizes must be positive");
  const int dim = pr.input_dim;
  CollocationBatch batch;
  batch.interior.resize(sizes.interior, dim);
  batch.boundary.resize(sizes.boundary, dim);
  batch.boundary_target.resize(sizes.boundary);
  batch.initial.resize(sizes.initial, dim);
  batch.initial_target.resize(sizes.initial);

  double x = 0, y = 0;
  for (int i = 0; i < sizes.interior; ++i) {
    double t;
    do {
      t = pr.time_horizon * uniform01(rng);
    } while (t == 0.0);
    draw_space(pr, rng, /*reject=*/true, x, y);
    batch.interior(i, 0) = t;
    batch.interior(i, 1) = x;
    if (dim == 3) batch.interior(i, 2) = y;
  }
  for (int i = 0; i < sizes.boundary; ++i) {
    const double t = pr.time_horizon * uniform01(rng);
    draw_boundary(pr, rng, x, y);
    batch.boundary(i, 0) = t;
    batch.boundary(i, 1) = x;
    if (dim == 3) batch.boundary(i, 2) = y;
    batch.boundary_target(i) = pr.boundary_target(t, x, y);
  }
  for (int i = 0; i < sizes.initial; ++i) {
    draw_space(pr, rng, /*reject=*/false, x, y);
    batch.initial(i, 0) = 0.0;
    batch.initial(i, 1) = x;
    if (dim == 3) batch.initial(i, 2) = y;
    batch.initial_target(i) = pr.initial_target(x, y);
  }
  return batch;
}

RowMat sample_spacetime(const Problem& pr, int n, std::mt19937_64& rng) {
  const int dim = pr.input_dim;
  RowMat pts(n, dim);
  double x = 0, y = 0;
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = pr.time_horizon * uniform01(rng);
    draw_space(pr, rng, /*reject=*/false, x, y);
    pts(i, 1) = x;
    if (dim == 3) pts(i, 2) = y;
  }
  return pts;
}

}  // namespace pinnobs
