#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pinnobs/problems.hpp"

using namespace pinnobs;

namespace {

bool rel_close(double a, double b, double rtol, double atol = 0.0) {
  return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b)) + atol;
}

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

// ===========================================================================
// 1D benchmark data
// ===========================================================================

TEST_CASE("psi_1d branch values") {
  CHECK(psi_1d(0.1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(psi_1d(0.5) == doctest::Approx(12.5).epsilon(1e-14));
  CHECK(psi_1d(0.9) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS(psi_1d(-0.01));
  CHECK_THROWS(psi_1d(1.01));
}

TEST_CASE("psi_1d is continuous at its breakpoints") {
  for (double bp : {0.25, 0.5, 0.75}) {
    const double eps = 1e-9;
    CHECK(std::abs(psi_1d(bp - eps) - psi_1d(bp + eps)) <= 1e-6);
  }
  // exact values at the quarter points
  CHECK(psi_1d(0.25) == doctest::Approx(6.25).epsilon(1e-14));
  CHECK(psi_1d(0.75) == doctest::Approx(6.25).epsilon(1e-14));
}

TEST_CASE("u_exact_1d frozen values") {
  for (double t : {0.0, 0.3, 1.0}) CHECK(u_exact_1d(0.0, t) == 0.0);
  for (double t : {0.0, 0.3, 1.0}) CHECK(u_exact_1d(1.0, t) == 0.0);
  CHECK(u_exact_1d(0.5, 0.0) == doctest::Approx(12.5).epsilon(1e-14));
  CHECK(u_exact_1d(0.25, 0.0) == doctest::Approx(7.322330470336311).epsilon(1e-14));
  CHECK_THROWS(u_exact_1d(-0.5, 0.0));
  CHECK_THROWS(u_exact_1d(0.5, 2.0));
}

TEST_CASE("u_exact_1d branches join at the free boundary at t = 0") {
  const double left = kSlope1D * kBreak1D;
  const double right = 100.0 * kBreak1D * (1.0 - kBreak1D) - 12.5;
  CHECK(std::abs(left - right) <= 1e-9);
}

TEST_CASE("forcing_1d frozen values") {
  CHECK(forcing_1d(0.2, 0.0) == doctest::Approx(-5.85786437626905e-3).epsilon(1e-12));
  CHECK(forcing_1d(0.5, 0.0) == doctest::Approx(200.0125).epsilon(1e-14));
  CHECK(forcing_1d(0.2, 0.0, /*gamma=*/0.0) == 0.0);  // stationary linear branch
  CHECK_THROWS(forcing_1d(kBreak1D, 0.5));
  CHECK_THROWS(forcing_1d(1.0 - kBreak1D, 0.5));
}

TEST_CASE("1D manufactured identity: analytic branch jets satisfy the residual") {
  const double gamma = 0.001;
  std::mt19937_64 rng(21);
  for (int k = 0; k < 200; ++k) {
    const double t = u01(rng);
    const double x = u01(rng);
    if (std::min(std::abs(x - kBreak1D), std::abs(x - (1 - kBreak1D))) < 1e-3) continue;
    const double E = std::exp(-gamma * t);
    Jet jet;
    jet.dim = 2;
    if (x < kBreak1D) {
      jet.value = kSlope1D * x * E;
      jet.grad = {-gamma * kSlope1D * x * E, kSlope1D * E, 0};
      jet.hess = {gamma * gamma * kSlope1D * x * E, -gamma * kSlope1D * E, 0.0, 0, 0, 0};
    } else if (x < 1 - kBreak1D) {
      jet.value = 100 * x * (1 - x) - 12.5 * E;
      jet.grad = {12.5 * gamma * E, 100 * (1 - 2 * x), 0};
      jet.hess = {-12.5 * gamma * gamma * E, 0.0, -200.0, 0, 0, 0};
    } else {
      jet.value = kSlope1D * (1 - x) * E;
      jet.grad = {-gamma * kSlope1D * (1 - x) * E, -kSlope1D * E, 0};
      jet.hess = {gamma * gamma * kSlope1D * (1 - x) * E, gamma * kSlope1D * E, 0.0, 0, 0, 0};
    }
    // anchor the hand derivatives against the exact solution by FD
    const double h = 1e-5;
    const double ut_fd = (u_exact_1d(x, std::min(t + h, 1.0)) - u_exact_1d(x, std::max(t - h, 0.0))) /
                         (std::min(t + h, 1.0) - std::max(t - h, 0.0));
    CHECK(rel_close(jet.grad[0], ut_fd, 1e-4, 1e-8));
    CHECK(std::abs(residual_parabolic_value(jet, forcing_1d(x, t, gamma))) <= 1e-8);
  }
}

// ===========================================================================
// 2D benchmark data
// ===========================================================================

TEST_CASE("psi_2d values at the center and outside the contact radius") {
  CHECK(psi_2d(0.0, 1) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(psi_2d(0.0, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(psi_2d(1.5, 1) == -1.0);
  CHECK(psi_2d(1.5, 2) == -1.0);
  CHECK_THROWS(psi_2d(-0.1, 1));
  CHECK_THROWS(psi_2d(0.5, 3));
}

TEST_CASE("u_exact_2d: center value and branch continuity at r*") {
  CHECK(u_exact_2d(0.0, 0.0, 0.1) == doctest::Approx(1.0).epsilon(1e-14));
  const double rs = kRStar2D;
  for (double t : {0.0, 0.4, 1.0}) {
    const double gamma = 0.1;
    const double decay = std::exp(-gamma * t);
    const double inner = std::sqrt(1.0 - rs * rs) * decay;
    const double outer = -rs * rs * std::log(rs / 2.0) / std::sqrt(1.0 - rs * rs) * decay;
    CHECK(std::abs(inner - outer) <= 1e-9);
    CHECK(std::abs(inner / decay - 0.71613) <= 5e-5);
  }
  // boundary of the disk of radius 2 is hom*ogeneous: log(2/2) = 0
  for (double t : {0.0, 0.5, 1.0}) CHECK(u_exact_2d(2.0, t, 0.1) == 0.0);
}

TEST_CASE("forcing_2d: harmonic outer branch and separable decay identity") {
  CHECK(forcing_2d(1.2, 0.3, /*gamma=*/0.0) == 0.0);
  std::mt19937_64 rng(3);
  const double gamma = 0.07;
  for (int k = 0; k < 100; ++k) {
    const double r = 2.0 * u01(rng);
    if (std::abs(r - kRStar2D) < 1e-6) continue;
    const double t = u01(rng);
    const double lhs = forcing_2d(r, t, gamma);
    const double rhs = forcing_2d(r, 0.0, gamma) * std::exp(-gamma * t);
    CHECK(rel_close(lhs, rhs, 1e-12, 1e-15));
  }
  CHECK_THROWS(forcing_2d(kRStar2D, 0.1, 0.1));
}

TEST_CASE("forcing_2d inner branch cross-checked by finite differences") {
  // f = -laplace(sqrt(1-r^2)) at gamma = 0; radial laplacian by central FD
  auto profile = [](double r) { return std::sqrt(1.0 - r * r); };
  const double h = 1e-5;
  for (double r : {0.2, 0.35, 0.5, 0.65}) {
    const double d2 = (profile(r + h) - 2 * profile(r) + profile(r - h)) / (h * h);
    const double d1 = (profile(r + h) - profile(r - h)) / (2 * h);
    const double lap = d2 + d1 / r;
    CHECK(rel_close(forcing_2d(r, 0.0, 0.0), -lap, 1e-6));
  }
}

TEST_CASE("2D manufactured identity through radial jets") {
  RadialField u;
  const double gamma = 0.1;
  const double rs = kRStar2D;
  const double c = -rs * rs / std::sqrt(1.0 - rs * rs);
  u.f = [rs, c](double r) {
    return r <= rs ? std::sqrt(1.0 - r * r) : c * std::log(r / 2.0);
  };
  u.df = [rs, c](double r) { return r <= rs ? -r / std::sqrt(1.0 - r * r) : c / r; };
  u.d2f = [rs, c](double r) {
    if (r <= rs) {
      const double s = 1.0 - r * r;
      return -1.0 / std::sqrt(s) - r * r / (s * std::sqrt(s));
    }
    return -c / (r * r);
  };
  u.gamma = gamma;
  std::mt19937_64 rng(8);
  for (int k = 0; k < 200; ++k) {
    const double r = 2.0 * std::sqrt(u01(rng));
    if (r < 0.05 || std::abs(r - rs) < 1e-3 || r > 1.95) continue;
    const double th = 2 * M_PI * u01(rng);
    const double t = u01(rng);
    const Jet jet = u.jet_at(t, r * std::cos(th), r * std::sin(th));
    CHECK(std::abs(residual_parabolic_value(jet, forcing_2d(r, t, gamma))) <= 1e-8);
  }
}

// ===========================================================================
// Obstacle dominance of the exact initial profiles
// ===========================================================================

TEST_CASE("exact solutions dominate their obstacles on the initial slice") {
  std::mt19937_64 rng(77);
  double min_margin_1d = 1e9;
  for (int k = 0; k < 100000; ++k) {
    const double x = u01(rng);
    min_margin_1d = std::min(min_margin_1d, u_exact_1d(x, 0.0) - psi_1d(x));
  }
  CHECK(min_margin_1d >= -1e-12);

  double min_case1 = 1e9, min_case2 = 1e9;
  for (int k = 0; k < 100000; ++k) {
    const double r = 2.0 * std::sqrt(u01(rng));
    const double u0 = u_exact_2d(r, 0.0, 0.1);
    min_case1 = std::min(min_case1, u0 - psi_2d(r, 1));
    min_case2 = std::min(min_case2, u0 - psi_2d(r, 2));
  }
  CHECK(min_case1 >= -1e-12);
  CHECK(min_case2 >= -1e-12);
  CHECK(min_case1 >= 0.29);  // case 1 never touches
}

TEST_CASE("sia profile dominates its bed on a 1000-point radial grid") {
  for (double p : {2.8, 4.0, 5.0}) {
    double min_margin = 1e9;
    for (int i = 0; i < 1000; ++i) {
      const double r = i / 999.0;
      min_margin = std::min(min_margin, sia_u0(r, p) - sia_bed(r, p));
    }
    CHECK(min_margin >= -1e-12);
  }
}

// ===========================================================================
// SIA pieces
// ===========================================================================

TEST_CASE("sia_u0 and sia_bed meet at the center with value 1") {
  for (double p : {2.8, 3.5, 4.0, 5.0}) {
    CHECK(sia_u0(0.0, p) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sia_bed(0.0, p) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("sia_u_exact at t = 0 is the initial profile") {
  for (double r : {0.0, 0.3, 0.75, 0.9}) {
    CHECK(sia_u_exact(r, 0.0, 4.0, 0.1) == sia_u0(r, 4.0));
  }
}

TEST_CASE("sia_u0 is C1 at the contact radius") {
  const double p = 4.0, eps = 1e-7;
  CHECK(std::abs(sia_u0(0.75 - eps, p) - sia_u0(0.75 + eps, p)) <= 1e-6);
  const double fd = (sia_u0(0.75 + eps, p) - sia_u0(0.75 - eps, p)) / (2 * eps);
  CHECK(rel_close(fd, sia_du0(0.75, p), 1e-5));
}

TEST_CASE("sia time term: frozen values and the u = 0 guard") {
  CHECK(sia_time_term(1.0, 4.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sia_time_term_prime(1.0, 4.0, 0.0) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(sia_time_term(0.0, 4.0, 1e-6) == 0.0);
  CHECK(sia_time_term_prime(0.0, 4.0, 1e-6) ==
        doctest::Approx(std::pow(1e-6, -0.3125)).epsilon(1e-12));
  CHECK_THROWS(sia_time_term(0.0, 4.0, 0.0));
  CHECK_THROWS(sia_time_term_prime(0.0, 4.0, 0.0));
}

TEST_CASE("phi_field frozen values") {
  CHECK(phi_field(0.7, {0.0, 0.0}, 4.0) == std::array<double, 2>{0.0, 0.0});
  CHECK(phi_field(0.0, {1.3, -0.4}, 4.0) == std::array<double, 2>{0.0, 0.0});
  const auto phi = phi_field(1.0, {1.0, 0.0}, 4.0);
  CHECK(phi[0] == doctest::Approx(-8.0 / 3.0).epsilon(1e-14));
  CHECK(phi[1] == 0.0);
}

TEST_CASE("mu_constant: frozen value and monotonicity in A") {
  CHECK(mu_constant(0.0, 3.0, 1.0) == 0.0);
  CHECK(mu_constant(1.0, 2.0, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  double prev = 0.0;
  for (double A : {0.5, 1.0, 2.0, 4.0}) {
    const double m = mu_constant(A, 4.0, 1.0);
    CHECK(m > prev);
    prev = m;
  }
}

// ===========================================================================
// Residual assembly
// ===========================================================================

TEST_CASE("residual_parabolic on simple closed forms") {
  Jet linear_in_t;  // u = t
  linear_in_t.dim = 2;
  linear_in_t.value = 0.4;
  linear_in_t.grad = {1.0, 0.0, 0.0};
  CHECK(residual_parabolic_value(linear_in_t, 1.0) == 0.0);

  Jet parabola;  // u = x^2 at x = 0.3
  parabola.dim = 2;
  parabola.value = 0.09;
  parabola.grad = {0.0, 0.6, 0.0};
  parabola.hess = {0, 0, 2.0, 0, 0, 0};
  CHECK(residual_parabolic_value(parabola, -2.0) == 0.0);
}

TEST_CASE("residual_sia: constant field over a flat bed vanishes") {
  Jet flat;
  flat.dim = 3;
  flat.value = 0.8;
  SIAConstants c;
  c.p = 4.0;
  c.mu = 0.3;
  SiaPointTerms terms;  // zero bed gradient, zero atilde
  CHECK(residual_sia_value(flat, c, terms) == 0.0);
}

TEST_CASE("residual_sia with mu = 0 reduces to the time term") {
  const double gamma = 0.37;
  Jet jet;  // u = e^{-gamma t} at t = 0
  jet.dim = 3;
  jet.value = 1.0;
  jet.grad = {-gamma, 0.0, 0.0};
  SIAConstants c;
  c.p = 4.0;
  c.mu = 0.0;
  c.eps_time = 0.0;
  c.eps_phi = 0.0;
  SiaPointTerms terms;
  CHECK(residual_sia_value(jet, c, terms) == doctest::Approx(-0.375 * gamma).epsilon(1e-14));
}

TEST_CASE("residual_sia divergence matches a nested finite-difference divergence") {
  // smooth radial bump on a flat bed: u(t,x,y) = 0.6 + 0.3 exp(-(x^2+y^2))
  SIAConstants c;
  c.p = 4.0;
  c.mu = 0.8;
  c.eps_time = 1e-6;
  auto value = [](double x, double y) { return 0.6 + 0.3 * std::exp(-(x * x + y * y)); };
  auto gradx = [&](double x, double y) { return -2.0 * x * 0.3 * std::exp(-(x * x + y * y)); };
  auto grady = [&](double x, double y) { return -2.0 * y * 0.3 * std::exp(-(x * x + y * y)); };
  auto flux = [&](double x, double y, int comp) {
    const double wx = gradx(x, y), wy = grady(x, y);
    const double s = wx * wx + wy * wy + c.delta_flux;
    const double M = std::pow(s, (c.p - 2.0) / 2.0);
    return c.mu * M * (comp == 0 ? wx : wy);
  };
  const double h = 1e-4;
  for (double x : {0.3, 0.7, 1.1}) {
    for (double y : {-0.2, 0.5}) {
      const double div_fd = (flux(x + h, y, 0) - flux(x - h, y, 0)) / (2 * h) +
                            (flux(x, y + h, 1) - flux(x, y - h, 1)) / (2 * h);
      Jet jet;
      jet.dim = 3;
      jet.value = value(x, y);
      jet.grad = {0.0, gradx(x, y), grady(x, y)};
      const double e = std::exp(-(x * x + y * y));
      jet.hess_ref(1, 1) = 0.3 * e * (4 * x * x - 2);
      jet.hess_ref(1, 2) = 0.3 * e * 4 * x * y;
      jet.hess_ref(2, 2) = 0.3 * e * (4 * y * y - 2);
      SiaPointTerms terms;  // flat bed
      const double res = residual_sia_value(jet, c, terms);
      // residual = g'(u) u_t - div; u_t = 0 here, so res = -div
      CHECK(rel_close(-res, div_fd, 1e-4, 1e-10));
    }
  }
}

TEST_CASE("sia manufactured identity: radial forcing route matches the cartesian expansion") {
  SIAConstants c;
  c.p = 4.0;
  c.mu = 1.0;
  c.eps_time = 1e-6;
  const double gamma = 0.1;
  Problem pr = make_sia_mms(c, gamma);
  std::mt19937_64 rng(4);
  RadialField field;
  field.f = [&](double r) { return sia_u0(r, c.p); };
  field.df = [&](double r) { return sia_du0(r, c.p); };
  field.d2f = [&](double r) { return sia_d2u0(r, c.p); };
  field.gamma = gamma;
  int tested = 0;
  for (int k = 0; k < 400 && tested < 200; ++k) {
    const double r = std::sqrt(u01(rng));
    if (r < 0.05 || std::abs(r - 0.75) < 1e-3 || r > 0.98) continue;
    const double th = 2 * M_PI * u01(rng);
    const double t = u01(rng);
    const double x = r * std::cos(th), y = r * std::sin(th);
    SiaPointTerms terms;
    terms.bed = pr.bed(x, y);
    terms.atilde = pr.forcing(t, x, y);  // radial route
    const Jet jet = field.jet_at(t, x, y);
    CHECK(std::abs(residual_sia_value(jet, c, terms)) <= 1e-6);  // cartesian route
    ++tested;
  }
  CHECK(tested == 200);
}

TEST_CASE("problem registry ids and basic wiring") {
  Problem p1 = make_mms1d();
  CHECK(p1.id == "mms1d");
  CHECK(p1.input_dim == 2);
  CHECK(p1.has_exact);
  CHECK(p1.boundary_target(0.5, 0.0, 0.0) == 0.0);

  Problem p2 = make_mms2d(2, 0.01);
  CHECK(p2.id == "mms2d-case2");
  CHECK(p2.domain.radius == 2.0);
  CHECK(p2.obstacle(0.0, 0.0) == doctest::Approx(1.0));

  SIAConstants c;
  Problem p3 = make_sia_mms(c, 0.1);
  CHECK(p3.mode == PhysicsMode::sia);
  CHECK(p3.bed(0.3, 0.0).value == doctest::Approx(sia_bed(0.3, c.p)).epsilon(1e-14));
  SIAConstants bad;
  bad.p = 2.0;
  CHECK_THROWS(make_sia_mms(bad, 0.1));
}
