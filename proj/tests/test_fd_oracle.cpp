#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pinnobs/fd_oracle.hpp"
#include "pinnobs/problems.hpp"

using namespace pinnobs;

TEST_CASE("unconstrained solve reproduces heat-kernel decay within 2%") {
  auto psi = [](double) { return -1e6; };
  auto f = [](double, double) { return 0.0; };
  auto g = [](double, double) { return 0.0; };
  auto u0 = [](double x) { return std::sin(M_PI * x); };
  const FDGrid grid = solve_obstacle_fd(psi, f, g, u0, 201, 1000);
  const double t = 0.1;  // step 100
  const int n = 100;
  const double exact_mid = std::sin(M_PI * 0.5) * std::exp(-M_PI * M_PI * t);
  CHECK(std::abs(grid.values(n, 100) - exact_mid) / exact_mid <= 0.02);
  // profile shape preserved
  for (int i = 10; i < 191; i += 20) {
    const double exact = std::sin(M_PI * grid.x_at(i)) * std::exp(-M_PI * M_PI * t);
    CHECK(std::abs(grid.values(n, i) - exact) <= 0.02 * exact_mid);
  }
}

TEST_CASE("constant data is a fixed point") {
  const double c = 2.5;
  auto cf = [c](double) { return c; };
  auto f = [](double, double) { return 0.0; };
  auto g = [c](double, double) { return c; };
  const FDGrid grid = solve_obstacle_fd(cf, f, g, cf, 31, 20);
  for (int n = 0; n <= grid.nt; ++n)
    for (int i = 0; i < grid.nx; ++i) CHECK(grid.values(n, i) == doctest::Approx(c).epsilon(1e-13));
}

TEST_CASE("mms1d oracle matches the exact solution within L1 0.02") {
  const Problem pr = make_mms1d();
  const FDGrid grid = solve_obstacle_fd(pr, 401, 2000);
  Eigen::MatrixXd exact(grid.nt + 1, grid.nx);
  for (int n = 0; n <= grid.nt; ++n)
    for (int i = 0; i < grid.nx; ++i) exact(n, i) = u_exact_1d(grid.x_at(i), grid.t_at(n));
  const double l1 = grid_l1(grid.values, exact);
  CHECK(l1 <= 0.02);
  MESSAGE("oracle vs exact L1 = ", l1);
}

TEST_CASE("solutions stay above the obstacle and projection is idempotent") {
  const Problem pr = make_mms1d();
  const FDGrid grid = solve_obstacle_fd(pr, 101, 50);
  for (int n = 0; n <= grid.nt; ++n) {
    for (int i = 0; i < grid.nx; ++i) {
      const double psi = psi_1d(grid.x_at(i));
      CHECK(grid.values(n, i) >= psi - 1e-12);
      CHECK(std::max(grid.values(n, i), psi) == grid.values(n, i));
    }
  }
  // boundary rows pinned to the boundary targets
  for (int n = 0; n <= grid.nt; ++n) {
    CHECK(grid.values(n, 0) == u_exact_1d(0.0, grid.t_at(n)));
    CHECK(grid.values(n, grid.nx - 1) == u_exact_1d(1.0, grid.t_at(n)));
  }
}

TEST_CASE("grid_l1 examples") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(5, 7);
  CHECK(grid_l1(a, a) == 0.0);
  Eigen::MatrixXd b = a.array() + 1.0;
  CHECK(grid_l1(a, b) == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::MatrixXd checker(2, 2), zeros = Eigen::MatrixXd::Zero(2, 2);
  checker << 1, -1, -1, 1;
  CHECK(grid_l1(checker, zeros) == 1.0);
  CHECK_THROWS(grid_l1(a, zeros));
}

TEST_CASE("discrete comparison principle: raising u0 never lowers the solution") {
  std::mt19937_64 rng(17);
  auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 5; ++trial) {
    const double a1 = u01(), a2 = 2.0 * u01() - 1.0, a3 = u01();
    auto psi = [&](double x) { return -0.5 + a1 * std::sin(2 * M_PI * x); };
    auto f = [&](double t, double x) { return a2 * std::cos(3 * x + t); };
    auto g = [](double, double) { return 1.0; };
    auto u0a = [&](double x) { return 1.0 + a3 * std::sin(M_PI * x); };
    auto u0b = [&](double x) { return u0a(x) + 0.4 * std::sin(M_PI * x) * std::sin(M_PI * x); };
    const FDGrid ga = solve_obstacle_fd(psi, f, g, u0a, 51, 40);
    const FDGrid gb = solve_obstacle_fd(psi, f, g, u0b, 51, 40);
    for (int n = 0; n <= ga.nt; ++n)
      for (int i = 0; i < ga.nx; ++i) CHECK(gb.values(n, i) >= ga.values(n, i) - 1e-12);
  }
}

TEST_CASE("refinement trend: consecutive-grid differences shrink") {
  const Problem pr = make_mms1d();
  const int nt = 400;
  const FDGrid g101 = solve_obstacle_fd(pr, 101, nt);
  const FDGrid g201 = solve_obstacle_fd(pr, 201, nt);
  const FDGrid g401 = solve_obstacle_fd(pr, 401, nt);
  // compare on the shared nodes x = i/100
  double d12 = 0, d23 = 0;
  long cnt = 0;
  for (int n = 0; n <= nt; ++n) {
    for (int i = 0; i < 101; ++i) {
      d12 += std::abs(g101.values(n, i) - g201.values(n, 2 * i));
      d23 += std::abs(g201.values(n, 2 * i) - g401.values(n, 4 * i));
      ++cnt;
    }
  }
  d12 /= static_cast<double>(cnt);
  d23 /= static_cast<double>(cnt);
  MESSAGE("refinement L1 gaps: ", d12, " -> ", d23);
  CHECK(d12 > d23);
}

TEST_CASE("fd grid file round-trip") {
  const Problem pr = make_mms1d();
  const FDGrid grid = solve_obstacle_fd(pr, 21, 10);
  const std::string path = "/tmp/pinnobs_fd_test.grid";
  write_fd_grid(grid, path);
  const FDGrid back = read_fd_grid(path);
  CHECK(back.nx == grid.nx);
  CHECK(back.nt == grid.nt);
  CHECK(back.values == grid.values);
  std::remove(path.c_str());
}

TEST_CASE("solver rejects degenerate grids") {
  auto zero1 = [](double) { return 0.0; };
  auto zero2 = [](double, double) { return 0.0; };
  CHECK_THROWS(solve_obstacle_fd(zero1, zero2, zero2, zero1, 2, 10));
  CHECK_THROWS(solve_obstacle_fd(zero1, zero2, zero2, zero1, 11, 0));
}
