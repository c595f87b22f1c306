#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "pinnobs/network.hpp"

using namespace pinnobs;

TEST_CASE("init is reproducible: same spec and seed give identical parameters") {
  ArchitectureSpec spec;
  spec.input_dim = 2;
  spec.hidden_layers = 3;
  spec.width = 16;
  NetworkParams a = init_params(spec, 1234);
  NetworkParams b = init_params(spec, 1234);
  for (int l = 0; l < a.layer_count(); ++l) {
    CHECK(a.W[static_cast<size_t>(l)] == b.W[static_cast<size_t>(l)]);
    CHECK(a.b[static_cast<size_t>(l)] == b.b[static_cast<size_t>(l)]);
  }
  NetworkParams c = init_params(spec, 1235);
  CHECK(a.W[0] != c.W[0]);
}

TEST_CASE("minimal architecture: width 1, one hidden layer") {
  ArchitectureSpec spec;
  spec.input_dim = 2;
  spec.hidden_layers = 1;
  spec.width = 1;
  NetworkParams p = init_params(spec, 7);
  REQUIRE(p.W.size() == 2);
  CHECK(p.W[0].rows() == 1);
  CHECK(p.W[0].cols() == 2);
  CHECK(p.b[0].size() == 1);
  CHECK(p.b[0](0) == 0.0);
  CHECK(p.b[1](0) == 0.0);
}

TEST_CASE("init scale: fan-in 100 bounds weights by 0.1, biases zero") {
  ArchitectureSpec spec;
  spec.input_dim = 2;
  spec.hidden_layers = 2;
  spec.width = 100;
  NetworkParams p = init_params(spec, 99);
  // second hidden layer and the output layer both have fan_in = 100
  CHECK(p.W[1].cwiseAbs().maxCoeff() <= 0.1);
  CHECK(p.W[2].cwiseAbs().maxCoeff() <= 0.1);
  CHECK(p.W[0].cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(2.0));
  for (int l = 0; l < p.layer_count(); ++l) CHECK(p.b[static_cast<size_t>(l)].isZero(0.0));
}

TEST_CASE("zero parameters give zero output everywhere") {
  ArchitectureSpec spec;
  spec.input_dim = 2;
  spec.hidden_layers = 2;
  spec.width = 8;
  NetworkParams p = init_params(spec, 3);
  for (auto& W : p.W) W.setZero();
  Eigen::VectorXd x(2);
  x << 0.37, 0.91;
  CHECK(forward_value(p, x) == 0.0);
  Jet j = forward_jets(p, x);
  CHECK(j.value == 0.0);
  for (int k = 0; k < 2; ++k) CHECK(j.grad[static_cast<size_t>(k)] == 0.0);
  for (int h = 0; h < 3; ++h) CHECK(j.hess[static_cast<size_t>(h)] == 0.0);
}

TEST_CASE("forward_value equals forward_jets value exactly (single code path)") {
  ArchitectureSpec spec;
  spec.input_dim = 3;
  spec.hidden_layers = 3;
  spec.width = 12;
  for (int trial = 0; trial < 5; ++trial) {
    NetworkParams p = init_params(spec, 40 + static_cast<std::uint64_t>(trial));
    std::mt19937_64 rng(static_cast<std::uint64_t>(trial));
    auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd x(3);
      x << u01(), u01(), u01();
      CHECK(forward_value(p, x) == forward_jets(p, x).value);  // 0 ulp
    }
  }
}

TEST_CASE("batched value evaluation agrees with the jet path") {
  ArchitectureSpec spec;
  spec.input_dim = 2;
  spec.hidden_layers = 4;
  spec.width = 24;
  spec.activation = Activation::relu2;
  NetworkParams p = init_params(spec, 77);
  RowMat pts(32, 2);
  std::mt19937_64 rng(5);
  auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 32; ++i) pts.row(i) << u01(), u01();
  Eigen::VectorXd v = eval_values(p, pts);
  for (int i = 0; i < 32; ++i) {
    const double ref = forward_value(p, pts.row(i).transpose());
    CHECK(std::abs(v(i) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("a hand-built relu2 pair reproduces u = 2t + x with exact derivatives") {
  // ((s+10)^2 - (10-s)^2) / 40 = s, with s = 2t + x; both units stay active
  // on [0,1]^2 so the network is exactly affine there.
  ArchitectureSpec spec;
  spec.input_dim = 2;
  spec.hidden_layers = 1;
  spec.width = 2;
  spec.activation = Activation::relu2;
  NetworkParams p = init_params(spec, 0);
  p.W[0] << 2.0, 1.0, -2.0, -1.0;
  p.b[0] << 10.0, 10.0;
  p.W[1] << 1.0 / 40.0, -1.0 / 40.0;
  p.b[1].setZero();

  Eigen::VectorXd x(2);
  x << 0.3, 0.4;  // (t, x)
  Jet j = forward_jets(p, x);
  CHECK(j.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(j.grad[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(j.grad[1] == doctest::Approx(1.0).epsilon(1e-13));
  for (int h = 0; h < 3; ++h) CHECK(std::abs(j.hess[static_cast<size_t>(h)]) <= 1e-12);
}

TEST_CASE("checkpoint round-trips parameters bit-exactly") {
  ArchitectureSpec spec;
  spec.input_dim = 3;
  spec.hidden_layers = 2;
  spec.width = 7;
  spec.activation = Activation::tanh;
  NetworkParams p = init_params(spec, 31415);
  const std::string path =
      (std::filesystem::temp_directory_path() / "pinnobs_ckpt_test.txt").string();
  save_checkpoint(p, path);
  NetworkParams q = load_checkpoint(path);
  CHECK(q.spec == p.spec);
  CHECK(q.rng_seed == p.rng_seed);
  for (int l = 0; l < p.layer_count(); ++l) {
    CHECK(p.W[static_cast<size_t>(l)] == q.W[static_cast<size_t>(l)]);
    CHECK(p.b[static_cast<size_t>(l)] == q.b[static_cast<size_t>(l)]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("spec validation rejects bad architectures") {
  ArchitectureSpec bad;
  bad.input_dim = 4;
  CHECK_THROWS(bad.validate());
  bad.input_dim = 2;
  bad.hidden_layers = 0;
  CHECK_THROWS(bad.validate());
  bad.hidden_layers = 1;
  bad.width = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("forward rejects dimension mismatch and non-finite input") {
  ArchitectureSpec spec;
  spec.input_dim = 2;
  spec.hidden_layers = 1;
  spec.width = 4;
  NetworkParams p = init_params(spec, 2);
  Eigen::VectorXd wrong(3);
  wrong << 0, 0, 0;
  CHECK_THROWS((void)forward_value(p, wrong));
  Eigen::VectorXd nan2(2);
  nan2 << 0.5, std::nan("");
  CHECK_THROWS((void)forward_jets(p, nan2));
}
