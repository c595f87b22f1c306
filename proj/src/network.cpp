#include "pinnobs/network.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pinnobs {

void ArchitectureSpec::validate() const {
  if (input_dim != 2 && input_dim != 3)
    throw std::invalid_argument("ArchitectureSpec: input_dim must be 2 or 3");
  if (hidden_layers < 1) throw std::invalid_argument("ArchitectureSpec: hidden_layers >= 1");
  if (width < 1) throw std::invalid_argument("ArchitectureSpec: width >= 1");
  if (output_dim != 1) throw std::invalid_argument("ArchitectureSpec: output_dim must be 1");
}

long NetworkParams::parameter_count() const {
  long n = 0;
  for (size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
  return n;
}

bool NetworkParams::finite() const {
  for (size_t l = 0; l < W.size(); ++l)
    if (!W[l].allFinite() || !b[l].allFinite()) return false;
  return true;
}

NetworkParams init_params(const ArchitectureSpec& spec, std::uint64_t seed, double init_gain) {
  spec.validate();
  NetworkParams p;
  p.spec = spec;
  p.rng_seed = seed;
  std::mt19937_64 rng(seed);
  auto u01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  int in = spec.input_dim;
  for (int l = 0; l < spec.hidden_layers + 1; ++l) {
    const int out = l == spec.hidden_layers ? spec.output_dim : spec.width;
    Eigen::MatrixXd W(out, in);
    const double scale = init_gain / std::sqrt(static_cast<double>(in));
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) W(r, c) = scale * (2.0 * u01() - 1.0);
    p.W.push_back(std::move(W));
    p.b.push_back(Eigen::VectorXd::Zero(out));
    in = out;
  }
  return p;
}

ParamGrads make_param_grads(const NetworkParams& params) {
  ParamGrads g;
  for (int l = 0; l < params.layer_count(); ++l) {
    g.slots.push_back(Eigen::MatrixXd::Zero(params.W[static_cast<size_t>(l)].rows(),
                                            params.W[static_cast<size_t>(l)].cols()));
    g.slots.push_back(Eigen::MatrixXd::Zero(params.b[static_cast<size_t>(l)].size(), 1));
  }
  return g;
}

NetTape::NetTape(const NetworkParams& params, JetLayout layout)
    : params_(&params), tape_(layout) {
  for (int l = 0; l < params.layer_count(); ++l) {
    const auto& W = params.W[static_cast<size_t>(l)];
    const auto& b = params.b[static_cast<size_t>(l)];
    w_slots_.push_back(tape_.add_slot(static_cast<int>(W.rows()), static_cast<int>(W.cols()), W.data()));
    b_slots_.push_back(tape_.add_slot(static_cast<int>(b.size()), 1, b.data()));
  }
}

NodeId NetTape::run(const Eigen::Ref<const RowMat>& points) {
  tape_.reset();
  NodeId z = tape_.input_batch(points);
  const int L = params_->layer_count();
  for (int l = 0; l < L; ++l) {
    z = tape_.affine(w_slots_[static_cast<size_t>(l)], b_slots_[static_cast<size_t>(l)], z);
    if (l + 1 < L) z = tape_.activation(params_->spec.activation, z);
  }
  return z;
}

Jet forward_jets(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& point) {
  if (point.size() != params.spec.input_dim)
    throw std::invalid_argument("forward_jets: point dimension mismatch");
  NetTape nt(params, JetLayout::full(params.spec.input_dim));
  RowMat pts(1, point.size());
  pts.row(0) = point.transpose();
  NodeId out = nt.run(pts);
  return nt.tape().jet_of(out, 0, 0);
}

double forward_value(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& point) {
  return forward_jets(params, point).value;
}

Eigen::VectorXd eval_values(const NetworkParams& params, const Eigen::Ref<const RowMat>& points) {
  if (points.cols() != params.spec.input_dim)
    throw std::invalid_argument("eval_values: point dimension mismatch");
  if (!points.allFinite()) throw std::invalid_argument("eval_values: non-finite input");
  RowMat h = points;
  const int L = params.layer_count();
  for (int l = 0; l < L; ++l) {
    RowMat z = (h * params.W[static_cast<size_t>(l)].transpose()).rowwise() +
               params.b[static_cast<size_t>(l)].transpose();
    if (l + 1 < L) {
      if (params.spec.activation == Activation::relu2) {
        h = z.array().max(0.0).square();
      } else {
        h = z.array().tanh();
      }
    } else {
      h = std::move(z);
    }
  }
  return h.col(0);
}

void save_checkpoint(const NetworkParams& params, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f << "pinnobs-checkpoint v1\n";
  f << "input_dim=" << params.spec.input_dim << " hidden_layers=" << params.spec.hidden_layers
    << " width=" << params.spec.width << " activation=" << activation_name(params.spec.activation)
    << " seed=" << params.rng_seed << "\n";
  char buf[64];
  for (int l = 0; l < params.layer_count(); ++l) {
    const auto& W = params.W[static_cast<size_t>(l)];
    const auto& b = params.b[static_cast<size_t>(l)];
    f << "W " << W.rows() << " " << W.cols() << "\n";
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", W(r, c));
        f << buf << (c + 1 == W.cols() ? "" : " ");
      }
      f << "\n";
    }
    f << "b " << b.size() << "\n";
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", b(r));
      f << buf << (r + 1 == b.size() ? "" : " ");
    }
    f << "\n";
  }
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

NetworkParams load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string line;
  std::getline(f, line);
  if (line != "pinnobs-checkpoint v1")
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  std::getline(f, line);
  NetworkParams p;
  {
    char act[16] = {0};
    std::uint64_t seed = 0;
    if (std::sscanf(line.c_str(), "input_dim=%d hidden_layers=%d width=%d activation=%15s seed=%" SCNu64,
                    &p.spec.input_dim, &p.spec.hidden_layers, &p.spec.width, act, &seed) != 5)
      throw std::runtime_error("load_checkpoint: bad header in " + path);
    p.rng_seed = seed;
    const std::string a(act);
    if (a == "relu2") {
      p.spec.activation = Activation::relu2;
    } else if (a == "tanh") {
      p.spec.activation = Activation::tanh;
    } else {
      throw std::runtime_error("load_checkpoint: unknown activation '" + a + "'");
    }
  }
  p.spec.validate();
  for (int l = 0; l < p.spec.hidden_layers + 1; ++l) {
    std::string tag;
    long rows = 0, cols = 0;
    if (!(f >> tag >> rows >> cols) || tag != "W")
      throw std::runtime_error("load_checkpoint: expected W block");
    Eigen::MatrixXd W(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c)
        if (!(f >> W(r, c))) throw std::runtime_error("load_checkpoint: truncated W block");
    long bn = 0;
    if (!(f >> tag >> bn) || tag != "b")
      throw std::runtime_error("load_checkpoint: expected b block");
    Eigen::VectorXd b(bn);
    for (long r = 0; r < bn; ++r)
      if (!(f >> b(r))) throw std::runtime_error("load_checkpoint: truncated b block");
    p.W.push_back(std::move(W));
    p.b.push_back(std::move(b));
  }
  return p;
}

}  // namespace pinnobs
