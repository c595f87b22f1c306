#include "pinnobs/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "pinnobs/grid.hpp"

namespace pinnobs {

namespace {
constexpr double kBreakTol = 1e-12;
}

// ===========================================================================
// 1D benchmark
// ===========================================================================

double psi_1d(double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("psi_1d: x outside [0,1]");
  if (x < 0.25) return 100.0 * x * x;
  if (x <= 0.75) return 100.0 * x * (1.0 - x) - 12.5;
  return 100.0 * (1.0 - x) * (1.0 - x);
}

double u_exact_1d(double x, double t, double gamma) {
  if (x < 0.0 || x > 1.0 || t < 0.0 || t > 1.0)
    throw std::domain_error("u_exact_1d: (x,t) outside [0,1]^2");
  const double decay = std::exp(-gamma * t);
  if (x < kBreak1D) return kSlope1D * x * decay;
  if (x < 1.0 - kBreak1D) return 100.0 * x * (1.0 - x) - 12.5 * decay;
  return kSlope1D * (1.0 - x) * decay;
}

double forcing_1d(double x, double t, double gamma) {
  if (std::abs(x - kBreak1D) <= kBreakTol || std::abs(x - (1.0 - kBreak1D)) <= kBreakTol)
    throw std::domain_error("forcing_1d: x at a branch breakpoint");
  const double decay = std::exp(-gamma * t);
  if (x < kBreak1D) return -gamma * kSlope1D * x * decay;
  if (x < 1.0 - kBreak1D) return 12.5 * gamma * decay + 200.0;
  return -gamma * kSlope1D * (1.0 - x) * decay;
}

// ===========================================================================
// 2D benchmark (radial, disk of radius 2)
// ===========================================================================

namespace {

// Spatial profile of the 2D solution and its radial derivatives.
double u2d_profile(double r) {
  if (r <= kRStar2D) return std::sqrt(1.0 - r * r);
  return -kRStar2D * kRStar2D * std::log(r / 2.0) / std::sqrt(1.0 - kRStar2D * kRStar2D);
}

double u2d_dprofile(double r) {
  if (r <= kRStar2D) return -r / std::sqrt(1.0 - r * r);
  return -kRStar2D * kRStar2D / (r * std::sqrt(1.0 - kRStar2D * kRStar2D));
}

double u2d_d2profile(double r) {
  if (r <= kRStar2D) {
    const double s = 1.0 - r * r;
    return -1.0 / std::sqrt(s) - r * r / (s * std::sqrt(s));
  }
  return kRStar2D * kRStar2D / (r * r * std::sqrt(1.0 - kRStar2D * kRStar2D));
}

}  // namespace

double psi_2d(double r, int case_id) {
  if (r < 0.0) throw std::domain_error("psi_2d: negative radius");
  if (r > 2.0 + kBreakTol) throw std::domain_error("psi_2d: radius outside the disk");
  if (case_id != 1 && case_id != 2) throw std::invalid_argument("psi_2d: case must be 1 or 2");
  if (r > kRStar2D) return -1.0;
  const double cap = std::sqrt(1.0 - r * r);
  return case_id == 1 ? cap - 0.7 : cap;
}

double u_exact_2d(double r, double t, double gamma) {
  if (r < 0.0) throw std::domain_error("u_exact_2d: negative radius");
  if (r > 2.0 + kBreakTol) throw std::domain_error("u_exact_2d: radius outside the disk");
  return u2d_profile(r) * std::exp(-gamma * t);
}

double forcing_2d(double r, double t, double gamma) {
  if (std::abs(r - kRStar2D) <= kBreakTol)
    throw std::domain_error("forcing_2d: radius at the branch boundary");
  const double decay = std::exp(-gamma * t);
  if (r > kRStar2D) return -gamma * u2d_profile(r) * decay;  // log(r/2) is harmonic
  const double s = 1.0 - r * r;
  const double lap = -2.0 / std::sqrt(s) - r * r / (s * std::sqrt(s));
  return (-gamma * std::sqrt(s) - lap) * decay;
}

// ===========================================================================
// SIA pieces
// ===========================================================================

void SIAConstants::validate() const {
  if (p < 2.8 || p > 5.0) throw std::invalid_argument("SIAConstants: p outside [2.8, 5]");
  if (!(mu > 0)) throw std::invalid_argument("SIAConstants: mu must be > 0");
  if (!(eps_time > 0)) throw std::invalid_argument("SIAConstants: eps_time must be > 0");
}

namespace {
constexpr double kSiaRStar = 0.75;

double sia_inner(double r, double p) {
  const double q = p / (p - 1.0);
  return 1.0 - (std::pow(r, q) - std::pow(1.0 - r, q) + 1.0 - q * r);
}

double sia_dinner(double r, double p) {
  const double q = p / (p - 1.0);
  const double e = 1.0 / (p - 1.0);
  return q * (1.0 - std::pow(r, e) - std::pow(1.0 - r, e));
}

double sia_d2inner(double r, double p) {
  const double q = p / (p - 1.0);
  return q * (q - 1.0) * (std::pow(1.0 - r, q - 2.0) - std::pow(r, q - 2.0));
}
}  // namespace

double sia_u0(double r, double p) {
  if (r < 0.0) throw std::domain_error("sia_u0: negative radius");
  if (r <= kSiaRStar) return sia_inner(r, p);
  return sia_inner(kSiaRStar, p) + sia_dinner(kSiaRStar, p) * (r - kSiaRStar);
}

double sia_du0(double r, double p) {
  if (r < 0.0) throw std::domain_error("sia_du0: negative radius");
  return sia_dinner(std::min(r, kSiaRStar), p);
}

double sia_d2u0(double r, double p) {
  if (r < 0.0) throw std::domain_error("sia_d2u0: negative radius");
  return r <= kSiaRStar ? sia_d2inner(r, p) : 0.0;
}

double sia_bed(double r, double p) {
  if (r < 0.0) throw std::domain_error("sia_bed: negative radius");
  return r <= kSiaRStar ? sia_inner(r, p) : 0.0;
}

double sia_dbed(double r, double p) { return r <= kSiaRStar ? sia_dinner(r, p) : 0.0; }

double sia_d2bed(double r, double p) { return r <= kSiaRStar ? sia_d2inner(r, p) : 0.0; }

double sia_u_exact(double r, double t, double p, double gamma) {
  return sia_u0(r, p) * std::exp(-gamma * t);
}

double sia_time_term(double u, double p, double eps_time) {
  const double uc = std::max(u, 0.0);
  const double base = uc * uc + eps_time;
  if (base == 0.0) throw std::domain_error("sia_time_term: eps_time = 0 with u = 0");
  const double alpha = (3.0 * p - 1.0) / (4.0 * p) - 1.0;
  return std::pow(base, alpha) * u;
}

double sia_time_term_prime(double u, double p, double eps_time) {
  const double uc = std::max(u, 0.0);
  const double base = uc * uc + eps_time;
  if (base == 0.0) throw std::domain_error("sia_time_term_prime: eps_time = 0 with u = 0");
  const double alpha = (3.0 * p - 1.0) / (4.0 * p) - 1.0;
  if (u <= 0.0) return std::pow(base, alpha);
  return std::pow(base, alpha - 1.0) * (base + 2.0 * alpha * u * u);
}

std::array<double, 2> phi_field(double u, const std::array<double, 2>& grad_b, double p) {
  const double uc = std::max(u, 0.0);
  const double kappa = (p + 1.0) / (2.0 * p);
  const double pw = uc > 0.0 ? std::exp(kappa * std::log(uc)) : 0.0;
  const double c = -2.0 * p / (p - 1.0) * pw;
  return {c * grad_b[0], c * grad_b[1]};
}

double mu_constant(double A, double p, double rho_g) {
  if (A < 0.0) throw std::invalid_argument("mu_constant: A must be >= 0");
  if (!(p > 1.0)) throw std::invalid_argument("mu_constant: p must be > 1");
  if (!(rho_g > 0.0)) throw std::invalid_argument("mu_constant: rho_g must be > 0");
  return 2.0 * std::pow(rho_g * (p - 1.0) / (2.0 * p), p - 1.0) * A / (p + 1.0);
}

// ===========================================================================
// Residual assembly
// ===========================================================================

JetIds extract_jet_ids(Tape& tape, NodeId out, int point, int dim) {
  const JetLayout lay = tape.layout();
  JetIds j;
  j.value = tape.comp(out, point, 0, 0);
  j.t = tape.comp(out, point, 0, lay.grad_slot(0));
  j.x = tape.comp(out, point, 0, lay.grad_slot(1));
  j.xx = tape.comp(out, point, 0, lay.hess_slot(1, 1));
  if (dim == 3) {
    j.y = tape.comp(out, point, 0, lay.grad_slot(2));
    j.xy = tape.comp(out, point, 0, lay.hess_slot(1, 2));
    j.yy = tape.comp(out, point, 0, lay.hess_slot(2, 2));
  }
  return j;
}

JetIds const_jet_ids(Tape& tape, const Jet& jet) {
  JetIds j;
  j.value = tape.constant(jet.value);
  j.t = tape.constant(jet.grad[0]);
  j.x = tape.constant(jet.grad[1]);
  j.xx = tape.constant(jet.hess_at(1, 1));
  if (jet.dim == 3) {
    j.y = tape.constant(jet.grad[2]);
    j.xy = tape.constant(jet.hess_at(1, 2));
    j.yy = tape.constant(jet.hess_at(2, 2));
  }
  return j;
}

NodeId build_residual_parabolic(Tape& tape, const JetIds& u, double f) {
  NodeId lap = u.yy == kNoNode ? u.xx : tape.add(u.xx, u.yy);
  return tape.shift(tape.sub(u.t, lap), -f);
}

NodeId build_residual_sia(Tape& tape, const JetIds& u, const SIAConstants& c,
                          const SiaPointTerms& terms) {
  const double p = c.p;
  const double alpha = (3.0 * p - 1.0) / (4.0 * p) - 1.0;
  const double kappa = (p + 1.0) / (2.0 * p);
  const double cphi = 2.0 * p / (p - 1.0);
  const BedSample& b = terms.bed;

  // time term: g'(u) * u_t with u clamped inside the power laws
  NodeId uc = tape.max0(u.value);
  NodeId uc2 = tape.square(uc);
  NodeId st = tape.shift(uc2, c.eps_time);
  NodeId gp = tape.mul(tape.pow_const(st, alpha - 1.0),
                       tape.add(st, tape.scale(uc2, 2.0 * alpha)));
  NodeId time_term = tape.mul(gp, u.t);

  // Phi = -cphi * P(u) * grad_b with P smoothed near u = 0 so that dP/du
  // stays bounded; spatial derivatives of Phi use dP/du * grad_u and the bed
  // Hessian.
  NodeId pe = tape.shift(uc2, c.eps_phi * c.eps_phi);
  NodeId P = tape.pow_const(pe, kappa / 2.0);
  NodeId dPdu = tape.scale(tape.mul(uc, tape.pow_const(pe, kappa / 2.0 - 1.0)), kappa);

  NodeId phix = tape.scale(P, -cphi * b.gx);
  NodeId phiy = tape.scale(P, -cphi * b.gy);
  NodeId dPx = tape.mul(dPdu, u.x);  // dP/dx = dP/du * u_x
  NodeId dPy = tape.mul(dPdu, u.y);
  // dPhi[l][k] = -cphi * (dP/dk * b_l + P * b_lk)
  NodeId dphi_xx = tape.add(tape.scale(dPx, -cphi * b.gx), tape.scale(P, -cphi * b.hxx));
  NodeId dphi_xy = tape.add(tape.scale(dPy, -cphi * b.gx), tape.scale(P, -cphi * b.hxy));
  NodeId dphi_yx = tape.add(tape.scale(dPx, -cphi * b.gy), tape.scale(P, -cphi * b.hxy));
  NodeId dphi_yy = tape.add(tape.scale(dPy, -cphi * b.gy), tape.scale(P, -cphi * b.hyy));

  NodeId wx = tape.sub(u.x, phix);
  NodeId wy = tape.sub(u.y, phiy);
  NodeId dwx_dx = tape.sub(u.xx, dphi_xx);
  NodeId dwx_dy = tape.sub(u.xy, dphi_xy);
  NodeId dwy_dx = tape.sub(u.xy, dphi_yx);
  NodeId dwy_dy = tape.sub(u.yy, dphi_yy);

  NodeId s = tape.shift(tape.add(tape.square(wx), tape.square(wy)), c.delta_flux);
  NodeId M = tape.pow_const(s, (p - 2.0) / 2.0);
  NodeId ds_dx = tape.scale(tape.add(tape.mul(wx, dwx_dx), tape.mul(wy, dwy_dx)), 2.0);
  NodeId ds_dy = tape.scale(tape.add(tape.mul(wx, dwx_dy), tape.mul(wy, dwy_dy)), 2.0);
  NodeId mfac = tape.pow_const(s, (p - 4.0) / 2.0);
  NodeId dM_dx = tape.scale(tape.mul(mfac, ds_dx), (p - 2.0) / 2.0);
  NodeId dM_dy = tape.scale(tape.mul(mfac, ds_dy), (p - 2.0) / 2.0);

  NodeId div = tape.scale(tape.add(tape.add(tape.mul(dM_dx, wx), tape.mul(dM_dy, wy)),
                                   tape.mul(M, tape.add(dwx_dx, dwy_dy))),
                          c.mu);
  return tape.shift(tape.sub(time_term, div), -terms.atilde);
}

double residual_parabolic_value(const Jet& jet, double f) {
  Tape scratch(jet.dim == 3 ? JetLayout::full(3) : JetLayout::full(2));
  return scratch.value(build_residual_parabolic(scratch, const_jet_ids(scratch, jet), f));
}

double residual_sia_value(const Jet& jet, const SIAConstants& c, const SiaPointTerms& terms) {
  Tape scratch(JetLayout::full(3));
  return scratch.value(build_residual_sia(scratch, const_jet_ids(scratch, jet), c, terms));
}

// ===========================================================================
// Radial exact fields
// ===========================================================================

double RadialField::value(double t, double x, double y) const {
  const double rho = scale * std::hypot(x - cx, y - cy);
  return f(rho) * std::exp(-gamma * t);
}

Jet RadialField::jet_at(double t, double x, double y) const {
  const double dx = x - cx, dy = y - cy;
  const double dist = std::hypot(dx, dy);
  if (dist == 0.0) throw std::domain_error("RadialField::jet_at: singular at the center");
  const double ex = dx / dist, ey = dy / dist;
  const double rho = scale * dist;
  const double E = std::exp(-gamma * t);
  const double v = f(rho), dv = scale * df(rho), d2v = scale * scale * d2f(rho);

  Jet j;
  j.dim = 3;
  j.value = v * E;
  j.grad[0] = -gamma * v * E;
  j.grad[1] = dv * ex * E;
  j.grad[2] = dv * ey * E;
  j.hess_ref(0, 0) = gamma * gamma * v * E;
  j.hess_ref(0, 1) = -gamma * dv * ex * E;
  j.hess_ref(0, 2) = -gamma * dv * ey * E;
  j.hess_ref(1, 1) = (d2v * ex * ex + dv * (1.0 - ex * ex) / dist) * E;
  j.hess_ref(1, 2) = (d2v - dv / dist) * ex * ey * E;
  j.hess_ref(2, 2) = (d2v * ey * ey + dv * (1.0 - ey * ey) / dist) * E;
  return j;
}

double sia_radial_forcing(const SIAConstants& c, const RadialField& u,
                          const std::function<double(double)>& bed_r,
                          const std::function<double(double)>& dbed_r,
                          const std::function<double(double)>& d2bed_r,
                          double t, double x, double y) {
  const double dist = std::hypot(x - u.cx, y - u.cy);
  if (dist == 0.0) throw std::domain_error("sia_radial_forcing: singular at the center");
  const double rho = u.scale * dist;
  const double E = std::exp(-u.gamma * t);
  const double uv = u.f(rho) * E;
  const double ur = u.scale * u.df(rho) * E;
  const double urr = u.scale * u.scale * u.d2f(rho) * E;
  const double ut = -u.gamma * uv;
  const double bd = u.scale * dbed_r(rho);
  const double bdd = u.scale * u.scale * d2bed_r(rho);
  (void)bed_r;

  const double p = c.p;
  const double alpha = (3.0 * p - 1.0) / (4.0 * p) - 1.0;
  const double kappa = (p + 1.0) / (2.0 * p);
  const double cphi = 2.0 * p / (p - 1.0);

  const double uc = std::max(uv, 0.0);
  const double st = uc * uc + c.eps_time;
  const double gp = std::pow(st, alpha - 1.0) * (st + 2.0 * alpha * uc * uc);

  const double pe = uc * uc + c.eps_phi * c.eps_phi;
  const double P = std::pow(pe, kappa / 2.0);
  const double dPdu = kappa * uc * std::pow(pe, kappa / 2.0 - 1.0);

  const double phir = -cphi * P * bd;
  const double dphir = -cphi * (dPdu * ur * bd + P * bdd);
  const double w = ur - phir;
  const double wd = urr - dphir;
  const double s = w * w + c.delta_flux;
  const double M = std::pow(s, (p - 2.0) / 2.0);
  const double dM = (p - 2.0) / 2.0 * std::pow(s, (p - 4.0) / 2.0) * 2.0 * w * wd;
  const double V = c.mu * M * w;
  const double dV = c.mu * (dM * w + M * wd);
  return gp * ut - (dV + V / dist);
}

// ===========================================================================
// Problem registry
// ===========================================================================

Problem make_mms1d(double gamma) {
  Problem pr;
  pr.id = "mms1d";
  pr.mode = PhysicsMode::linear_parabolic;
  pr.input_dim = 2;
  pr.domain.kind = DomainKind::interval;
  pr.decay_rate = gamma;
  pr.has_exact = true;
  pr.exact = [gamma](double t, double x, double) { return u_exact_1d(x, t, gamma); };
  pr.obstacle = [](double x, double) { return psi_1d(x); };
  pr.forcing = [gamma](double t, double x, double) { return forcing_1d(x, t, gamma); };
  pr.boundary_target = [gamma](double t, double x, double) { return u_exact_1d(x, t, gamma); };
  pr.initial_target = [gamma](double x, double) { return u_exact_1d(x, 0.0, gamma); };
  pr.space_breakpoints = {0.25, kBreak1D, 0.5, 1.0 - kBreak1D, 0.75};
  return pr;
}

Problem make_mms2d(int case_id, double gamma) {
  Problem pr;
  pr.id = case_id == 1 ? "mms2d-case1" : "mms2d-case2";
  pr.mode = PhysicsMode::linear_parabolic;
  pr.input_dim = 3;
  pr.domain.kind = DomainKind::disk;
  pr.domain.radius = 2.0;
  pr.decay_rate = gamma;
  pr.has_exact = true;
  auto radius = [](double x, double y) { return std::hypot(x, y); };
  pr.exact = [gamma, radius](double t, double x, double y) {
    return u_exact_2d(radius(x, y), t, gamma);
  };
  pr.obstacle = [case_id, radius](double x, double y) { return psi_2d(radius(x, y), case_id); };
  pr.forcing = [gamma, radius](double t, double x, double y) {
    return forcing_2d(radius(x, y), t, gamma);
  };
  pr.boundary_target = pr.exact;
  pr.initial_target = [gamma, radius](double x, double y) {
    return u_exact_2d(radius(x, y), 0.0, gamma);
  };
  pr.space_breakpoints = {0.0, kRStar2D};
  return pr;
}

namespace {

RadialField sia_exact_field(double p, double gamma, double cx, double cy, double scale) {
  RadialField u;
  u.f = [p](double r) { return sia_u0(r, p); };
  u.df = [p](double r) { return sia_du0(r, p); };
  u.d2f = [p](double r) { return sia_d2u0(r, p); };
  u.cx = cx;
  u.cy = cy;
  u.scale = scale;
  u.gamma = gamma;
  return u;
}

}  // namespace

Problem make_sia_mms(const SIAConstants& c, double gamma) {
  c.validate();
  Problem pr;
  pr.id = "sia-mms";
  pr.mode = PhysicsMode::sia;
  pr.input_dim = 3;
  pr.domain.kind = DomainKind::disk;
  pr.domain.radius = 1.0;
  pr.decay_rate = gamma;
  pr.sia = c;
  pr.has_exact = true;
  const double p = c.p;
  pr.exact = [p, gamma](double t, double x, double y) {
    return sia_u_exact(std::hypot(x, y), t, p, gamma);
  };
  pr.obstacle = [](double, double) { return 0.0; };  // transformed constraint u >= 0
  RadialField field = sia_exact_field(p, gamma, 0.0, 0.0, 1.0);
  SIAConstants cc = c;
  pr.forcing = [cc, field, p](double t, double x, double y) {
    return sia_radial_forcing(
        cc, field, [p](double r) { return sia_bed(r, p); },
        [p](double r) { return sia_dbed(r, p); }, [p](double r) { return sia_d2bed(r, p); }, t, x,
        y);
  };
  pr.boundary_target = pr.exact;
  pr.initial_target = [p](double x, double y) { return sia_u0(std::hypot(x, y), p); };
  pr.bed = [p](double x, double y) {
    const double r = std::hypot(x, y);
    BedSample b;
    b.value = sia_bed(r, p);
    if (r == 0.0) return b;  // grad vanishes at the center by symmetry
    const double ex = x / r, ey = y / r;
    const double d1 = sia_dbed(r, p), d2 = sia_d2bed(r, p);
    b.gx = d1 * ex;
    b.gy = d1 * ey;
    b.hxx = d2 * ex * ex + d1 * (1.0 - ex * ex) / r;
    b.hxy = (d2 - d1 / r) * ex * ey;
    b.hyy = d2 * ey * ey + d1 * (1.0 - ey * ey) / r;
    return b;
  };
  pr.space_breakpoints = {0.0, 0.75};
  return pr;
}

Problem make_raster_problem(std::shared_ptr<const RasterProblemData> data, const SIAConstants& c,
                            const std::string& atilde_mode) {
  c.validate();
  if (!data) throw std::invalid_argument("make_raster_problem: null data");
  Problem pr;
  pr.id = "raster";
  pr.mode = PhysicsMode::sia;
  pr.input_dim = 3;
  pr.domain.kind = DomainKind::rectangle;
  const RasterGrid& g = data->thickness_t0;
  pr.domain.x0 = g.x0;
  pr.domain.x1 = g.x_at(g.nx - 1);
  pr.domain.y0 = g.y0;
  pr.domain.y1 = g.y_at(g.ny - 1);
  pr.decay_rate = data->gamma;
  pr.sia = c;
  pr.obstacle = [](double, double) { return 0.0; };
  pr.initial_target = [data](double x, double y) {
    return bilinear_sample(data->thickness_t0, x, y).value;
  };
  pr.bed = [data](double x, double y) {
    const GridSample s = bilinear_sample(data->bed, x, y);
    BedSample b;
    b.value = s.value;
    b.gx = s.gx;
    b.gy = s.gy;
    b.hxy = s.hxy;  // pure second derivatives of a bilinear patch vanish
    return b;
  };

  if (atilde_mode == "zero") {
    pr.forcing = [](double, double, double) { return 0.0; };
    pr.boundary_target = [](double, double, double) { return 0.0; };
    pr.has_exact = false;
  } else if (atilde_mode == "synthetic") {
    if (!data->synthetic)
      throw std::invalid_argument("make_raster_problem: dataset carries no generation constants");
    // Generation-consistent forcing: the residual of the exact radial target
    // under this problem's own operator (bilinear bed included) with the
    // generating constants (mu_star, p, gamma). The target is then an exact
    // solution of the trained system for the run whose mu matches mu_star.
    RadialField field = sia_exact_field(data->p, data->gamma, 0.5, 0.5, 2.0);
    SIAConstants gen = c;
    gen.mu = data->mu_star;
    gen.p = data->p;
    auto bed_fn = pr.bed;
    pr.forcing = [gen, field, bed_fn](double t, double x, double y) {
      SiaPointTerms terms;
      terms.bed = bed_fn(x, y);
      terms.atilde = 0.0;
      return residual_sia_value(field.jet_at(t, x, y), gen, terms);
    };
    pr.has_exact = true;
    pr.exact = [field](double t, double x, double y) { return field.value(t, x, y); };
    pr.boundary_target = pr.exact;
  } else {
    throw std::invalid_argument("make_raster_problem: atilde mode must be 'zero' or 'synthetic'");
  }
  return pr;
}

}  // namespace pinnobs
