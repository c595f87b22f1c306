#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pinnobs/tape.hpp"

namespace pinnobs {

// ===========================================================================
// 1D benchmark: piecewise obstacle and manufactured solution on [0,1]
// ===========================================================================

/// Free-boundary abscissa of the 1D solution, 1/(2*sqrt(2)).
inline constexpr double kBreak1D = 0.35355339059327373;
/// Slope constant 100 - 50*sqrt(2) of the outer branches.
inline constexpr double kSlope1D = 29.289321881345245;

double psi_1d(double x);
double u_exact_1d(double x, double t, double gamma = 0.001);
double forcing_1d(double x, double t, double gamma = 0.001);

// ===========================================================================
// 2D benchmark: radial obstacle problem on the disk of radius 2
// ===========================================================================

/// Contact radius at which the two solution branches join C^1.
inline constexpr double kRStar2D = 0.6979651482;

double psi_2d(double r, int case_id);  // case_id in {1,2}
double u_exact_2d(double r, double t, double gamma);
double forcing_2d(double r, double t, double gamma);

// ===========================================================================
// Ice-thickness model pieces
// ===========================================================================

struct SIAConstants {
  double p = 4.0;          // Glen exponent
  double mu = 1.0;         // flux coefficient (spatially constant)
  double eps_time = 1e-6;  // regularization of the singular time term
  double rho_g = 1.0;
  double softness_A = 1.0;
  double eps_phi = 1e-8;    // smoothing scale of d/du inside the Phi power
  double delta_flux = 1e-10;
  void validate() const;
};

/// Radially symmetric manufactured profile (contact radius 0.75) and its bed.
double sia_u0(double r, double p);
double sia_du0(double r, double p);
double sia_d2u0(double r, double p);
double sia_bed(double r, double p);
double sia_dbed(double r, double p);
double sia_d2bed(double r, double p);
double sia_u_exact(double r, double t, double p, double gamma);

/// Regularized time-term factor g(u) = (max(u,0)^2 + eps)^a * u with
/// a = (3p-1)/(4p) - 1, and its derivative.
double sia_time_term(double u, double p, double eps_time);
double sia_time_term_prime(double u, double p, double eps_time);

/// Phi(x, u) = -(2p/(p-1)) * max(u,0)^((p+1)/(2p)) * grad_b.
std::array<double, 2> phi_field(double u, const std::array<double, 2>& grad_b, double p);

/// Flux coefficient for spatially constant softness:
/// mu = 2 * (rho_g (p-1)/(2p))^(p-1) * A/(p+1).
double mu_constant(double A, double p, double rho_g);

// ===========================================================================
// Pointwise residual assembly from an output jet
// ===========================================================================

/// Taped handles of one output jet's components (kNoNode for absent 1D slots).
struct JetIds {
  NodeId value = kNoNode;
  NodeId t = kNoNode, x = kNoNode, y = kNoNode;
  NodeId xx = kNoNode, xy = kNoNode, yy = kNoNode;
};

/// Extract the jet components of `point` from a batched output node.
JetIds extract_jet_ids(Tape& tape, NodeId out, int point, int dim);
/// Enter a fixed jet as constant leaves (used for forcing construction and
/// residual tests).
JetIds const_jet_ids(Tape& tape, const Jet& jet);

/// Bed elevation sample with first and second spatial derivatives.
struct BedSample {
  double value = 0, gx = 0, gy = 0, hxx = 0, hxy = 0, hyy = 0;
};

struct SiaPointTerms {
  BedSample bed;
  double atilde = 0.0;
};

/// u_t - laplacian(u) - f.
NodeId build_residual_parabolic(Tape& tape, const JetIds& u, double f);
/// g'(u) u_t - div(mu |grad u - Phi|^(p-2) (grad u - Phi)) - atilde, expanded
/// analytically through the jet's Hessian and the bed derivatives. The flux
/// norm is regularized as (|w|^2 + delta_flux)^((p-2)/2).
NodeId build_residual_sia(Tape& tape, const JetIds& u, const SIAConstants& c,
                          const SiaPointTerms& terms);

double residual_parabolic_value(const Jet& jet, double f);
double residual_sia_value(const Jet& jet, const SIAConstants& c, const SiaPointTerms& terms);

// ===========================================================================
// Radial exact solutions as jets, and the SIA manufactured forcing
// ===========================================================================

/// Time-decaying radial field u = profile(scale * dist((x,y),center)) * e^(-gamma t)
/// with closed-form derivatives; produces exact jets for tests and forcings.
struct RadialField {
  std::function<double(double)> f, df, d2f;  // profile of the scaled radius
  double cx = 0, cy = 0;
  double scale = 1.0;
  double gamma = 0.0;

  double value(double t, double x, double y) const;
  Jet jet_at(double t, double x, double y) const;  // dim = 3
};

/// Independent radial-form evaluation of the SIA residual of a RadialField
/// whose bed is also radial: g'(u)u_t - (V'(d) + V(d)/d) with
/// V = mu (w^2 + delta)^((p-2)/2) w. Used as the manufactured forcing and as
/// the algebraic cross-check of build_residual_sia.
double sia_radial_forcing(const SIAConstants& c, const RadialField& u,
                          const std::function<double(double)>& bed_r,
                          const std::function<double(double)>& dbed_r,
                          const std::function<double(double)>& d2bed_r,
                          double t, double x, double y);

// ===========================================================================
// Problem registry
// ===========================================================================

enum class PhysicsMode { linear_parabolic, sia };
enum class DomainKind { interval, disk, rectangle };

struct Domain {
  DomainKind kind = DomainKind::interval;
  double radius = 1.0;  // disk
  double cx = 0.0, cy = 0.0;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;  // rectangle
};

/// One obstacle problem: domain, data functions, physics mode and constants.
/// Exact solution is optional; when present it must dominate the obstacle.
struct Problem {
  std::string id;
  PhysicsMode mode = PhysicsMode::linear_parabolic;
  int input_dim = 2;
  Domain domain;
  double time_horizon = 1.0;
  double decay_rate = 0.0;
  SIAConstants sia;
  bool has_exact = false;
  std::function<double(double t, double x, double y)> exact;
  std::function<double(double x, double y)> obstacle;
  std::function<double(double t, double x, double y)> forcing;
  std::function<double(double t, double x, double y)> boundary_target;
  std::function<double(double x, double y)> initial_target;
  std::function<BedSample(double x, double y)> bed;
  std::vector<double> space_breakpoints;  // x (interval) or radius (disk)
};

Problem make_mms1d(double gamma = 0.001);
Problem make_mms2d(int case_id, double gamma);
Problem make_sia_mms(const SIAConstants& c, double gamma);

struct RasterProblemData;  // grid.hpp

/// Raster-backed problem on the grid extent, time mapped to [0,1].
/// atilde_mode "zero" uses a zero mass balance and homogeneous boundary;
/// "synthetic" reconstructs the generation-consistent forcing, boundary and
/// exact field from the dataset's generation constants (mu_star, p, gamma in
/// the manifest). The run's own mu/p stay in `run_constants`.
Problem make_raster_problem(std::shared_ptr<const RasterProblemData> data,
                            const SIAConstants& run_constants, const std::string& atilde_mode);

}  // namespace pinnobs
