#include "pinnobs/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace pinnobs {

namespace {

struct ActDerivs {
  double s0, s1, s2, s3;
};

inline ActDerivs act_derivs(Activation a, double z) {
  if (a == Activation::relu2) {
    if (z > 0.0) return {z * z, 2.0 * z, 2.0, 0.0};
    return {0.0, 0.0, 0.0, 0.0};  // second derivative at 0 defined as 0
  }
  const double t = std::tanh(z);
  const double s1 = 1.0 - t * t;
  return {t, s1, -2.0 * t * s1, s1 * (6.0 * t * t - 2.0)};
}

}  // namespace

void Tape::reset() {
  nodes_.clear();
  val_.clear();
  adj_.clear();
  operand_buf_.clear();
  vec_used_ = 0;
}

int Tape::add_slot(int rows, int cols, const double* values) {
  slots_.push_back(Slot{rows, cols, values});
  return static_cast<int>(slots_.size()) - 1;
}

ParamGrads Tape::make_grads() const {
  ParamGrads g;
  g.slots.reserve(slots_.size());
  for (const auto& s : slots_) g.slots.push_back(Eigen::MatrixXd::Zero(s.rows, s.cols));
  return g;
}

NodeId Tape::push(Node n, double value) {
  nodes_.push_back(n);
  val_.push_back(value);
  adj_.push_back(0.0);
  return static_cast<NodeId>(nodes_.size()) - 1;
}

std::int32_t Tape::alloc_vec(Eigen::Index rows, Eigen::Index cols) {
  if (vec_used_ == static_cast<std::int32_t>(vec_vals_.size())) {
    vec_vals_.emplace_back();
    vec_adjs_.emplace_back();
  }
  const std::int32_t i = vec_used_++;
  if (vec_vals_[static_cast<size_t>(i)].rows() != rows ||
      vec_vals_[static_cast<size_t>(i)].cols() != cols) {
    vec_vals_[static_cast<size_t>(i)].resize(rows, cols);
    vec_adjs_[static_cast<size_t>(i)].resize(rows, cols);
  }
  return i;
}

NodeId Tape::constant(double v) { return push({Op::kConst}, v); }

NodeId Tape::param(int slot, int flat_index) {
  const Slot& s = slots_.at(static_cast<size_t>(slot));
  if (flat_index < 0 || flat_index >= s.rows * s.cols)
    throw std::out_of_range("Tape::param: index out of slot range");
  Node n{Op::kParam};
  n.b = slot;
  n.c = flat_index;
  return push(n, s.values[flat_index]);
}

NodeId Tape::input_batch(const Eigen::Ref<const RowMat>& points) {
  const int d = layout_.dim;
  if (d == 0) {
    // value-only: a single slot per point carrying the raw coordinates
    if (!points.allFinite()) throw std::invalid_argument("input_batch: non-finite coordinate");
    Node n{Op::kInput};
    n.vec = alloc_vec(points.rows(), points.cols());
    vec_val(n.vec) = points;
    return push(n, 0.0);
  }
  if (points.cols() != d) throw std::invalid_argument("input_batch: wrong point dimension");
  if (!points.allFinite()) throw std::invalid_argument("input_batch: non-finite coordinate");
  const int S = layout_.slots;
  const Eigen::Index npts = points.rows();
  Node n{Op::kInput};
  n.vec = alloc_vec(npts * S, d);
  RowMat& m = vec_val(n.vec);
  m.setZero();
  for (Eigen::Index p = 0; p < npts; ++p) {
    m.row(p * S) = points.row(p);
    for (int k = 0; k < d; ++k) m(p * S + layout_.grad_slot(k), k) = 1.0;
  }
  return push(n, 0.0);
}

NodeId Tape::affine(int w_slot, int b_slot, NodeId z) {
  const std::int32_t zvec = nodes_.at(static_cast<size_t>(z)).vec;
  if (zvec < 0) throw std::invalid_argument("affine: operand is not a batch node");
  const Slot& ws = slots_.at(static_cast<size_t>(w_slot));
  if (ws.cols != vec_val(zvec).cols()) throw std::invalid_argument("affine: shape mismatch");
  Eigen::Map<const Eigen::MatrixXd> W(ws.values, ws.rows, ws.cols);

  Node n{Op::kAffine};
  n.a = z;
  n.b = w_slot;
  n.c = b_slot;
  n.vec = alloc_vec(vec_val(zvec).rows(), ws.rows);
  const RowMat& zin = vec_val(zvec);  // re-taken: alloc_vec may grow the pool
  RowMat& out = vec_val(n.vec);
  out.noalias() = zin * W.transpose();
  if (b_slot >= 0) {
    const Slot& bs = slots_.at(static_cast<size_t>(b_slot));
    if (bs.rows != ws.rows || bs.cols != 1) throw std::invalid_argument("affine: bias shape mismatch");
    Eigen::Map<const Eigen::VectorXd> bias(bs.values, bs.rows);
    const int S = layout_.slots;
    using StrideT = Eigen::Stride<Eigen::Dynamic, 1>;
    Eigen::Map<RowMat, 0, StrideT> vrows(out.data(), out.rows() / S, out.cols(),
                                         StrideT(S * out.cols(), 1));
    vrows.rowwise() += bias.transpose();
  }
  return push(n, 0.0);
}

NodeId Tape::activation(Activation act, NodeId z) {
  const std::int32_t zvec = nodes_.at(static_cast<size_t>(z)).vec;
  if (zvec < 0) throw std::invalid_argument("activation: operand is not a batch node");
  Node n{Op::kAct};
  n.a = z;
  n.aux = act == Activation::relu2 ? 0.0 : 1.0;
  n.vec = alloc_vec(vec_val(zvec).rows(), vec_val(zvec).cols());
  const RowMat& zin = vec_val(zvec);  // re-taken: alloc_vec may grow the pool
  RowMat& out = vec_val(n.vec);

  const int S = layout_.slots;
  const int d = layout_.dim;
  if (d == 0) {
    if (act == Activation::relu2) {
      out = zin.array().max(0.0).square();
    } else {
      out = zin.array().tanh();
    }
    return push(n, 0.0);
  }
  const Eigen::Index npts = zin.rows() / S;
  const Eigen::Index m = zin.cols();
  const int hs0 = 1 + d;                 // first hessian slot
  const int nh = d * (d + 1) / 2;
  for (Eigen::Index p = 0; p < npts; ++p) {
    const Eigen::Index base = p * S;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double v = zin(base, j);
      const auto dv = act_derivs(act, v);
      out(base, j) = dv.s0;
      double g[3];
      for (int k = 0; k < d; ++k) {
        g[k] = zin(base + 1 + k, j);
        out(base + 1 + k, j) = dv.s1 * g[k];
      }
      int h = 0;
      for (int i = 0; i < d; ++i)
        for (int k = i; k < d; ++k, ++h)
          out(base + hs0 + h, j) = dv.s2 * g[i] * g[k] + dv.s1 * zin(base + hs0 + h, j);
      (void)nh;
    }
  }
  return push(n, 0.0);
}

NodeId Tape::comp(NodeId z, int point, int neuron, int slot) {
  const Node& zn = nodes_.at(static_cast<size_t>(z));
  if (zn.vec < 0) throw std::invalid_argument("comp: operand is not a batch node");
  const int S = layout_.slots;
  Node n{Op::kComp};
  n.a = z;
  n.b = point * S + slot;
  n.c = neuron;
  return push(n, vec_val(zn.vec)(n.b, neuron));
}

Jet Tape::jet_of(NodeId z, int point, int neuron) const {
  const Node& zn = nodes_.at(static_cast<size_t>(z));
  const RowMat& m = vec_val(zn.vec);
  const int d = layout_.dim;
  const int S = layout_.slots;
  Jet j;
  j.dim = d;
  const Eigen::Index base = static_cast<Eigen::Index>(point) * S;
  j.value = m(base, neuron);
  for (int k = 0; k < d; ++k) j.grad[static_cast<size_t>(k)] = m(base + 1 + k, neuron);
  for (int h = 0; h < d * (d + 1) / 2; ++h) j.hess[static_cast<size_t>(h)] = m(base + 1 + d + h, neuron);
  return j;
}

int Tape::batch_points(NodeId z) const {
  const Node& zn = nodes_.at(static_cast<size_t>(z));
  return static_cast<int>(vec_val(zn.vec).rows() / layout_.slots);
}

NodeId Tape::add(NodeId a, NodeId b) { return push({Op::kAdd, a, b}, value(a) + value(b)); }
NodeId Tape::sub(NodeId a, NodeId b) { return push({Op::kSub, a, b}, value(a) - value(b)); }
NodeId Tape::mul(NodeId a, NodeId b) { return push({Op::kMul, a, b}, value(a) * value(b)); }

NodeId Tape::div(NodeId a, NodeId b) {
  if (value(b) == 0.0)
    throw NumericDomainError("div: zero denominator", static_cast<long>(nodes_.size()));
  return push({Op::kDiv, a, b}, value(a) / value(b));
}

NodeId Tape::neg(NodeId a) { return push({Op::kNeg, a}, -value(a)); }

NodeId Tape::scale(NodeId a, double c) {
  Node n{Op::kScale, a};
  n.aux = c;
  return push(n, c * value(a));
}

NodeId Tape::shift(NodeId a, double c) {
  Node n{Op::kShift, a};
  n.aux = c;
  return push(n, value(a) + c);
}

NodeId Tape::square(NodeId a) {
  const double x = value(a);
  return push({Op::kSquare, a}, x * x);
}

NodeId Tape::pow_const(NodeId a, double e) {
  const double x = value(a);
  if (x < 0.0)
    throw NumericDomainError("pow: negative base", static_cast<long>(nodes_.size()));
  if (x == 0.0 && e < 0.0)
    throw NumericDomainError("pow: zero base, negative exponent", static_cast<long>(nodes_.size()));
  Node n{Op::kPow, a};
  n.aux = e;
  return push(n, std::pow(x, e));
}

NodeId Tape::log(NodeId a) {
  if (value(a) <= 0.0)
    throw NumericDomainError("log: non-positive argument", static_cast<long>(nodes_.size()));
  return push({Op::kLog, a}, std::log(value(a)));
}

NodeId Tape::sqrt(NodeId a) {
  if (value(a) < 0.0)
    throw NumericDomainError("sqrt: negative argument", static_cast<long>(nodes_.size()));
  return push({Op::kSqrt, a}, std::sqrt(value(a)));
}

NodeId Tape::exp(NodeId a) { return push({Op::kExp, a}, std::exp(value(a))); }

NodeId Tape::max0(NodeId a) { return push({Op::kMax0, a}, value(a) > 0.0 ? value(a) : 0.0); }

NodeId Tape::mean(std::span<const NodeId> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty operand list");
  Node n{Op::kMean};
  n.a = static_cast<NodeId>(operand_buf_.size());
  n.b = static_cast<NodeId>(xs.size());
  double s = 0;
  for (NodeId x : xs) {
    operand_buf_.push_back(x);
    s += value(x);
  }
  return push(n, s / static_cast<double>(xs.size()));
}

NodeId Tape::sum(std::span<const NodeId> xs) {
  Node n{Op::kSum};
  n.a = static_cast<NodeId>(operand_buf_.size());
  n.b = static_cast<NodeId>(xs.size());
  double s = 0;
  for (NodeId x : xs) {
    operand_buf_.push_back(x);
    s += value(x);
  }
  return push(n, s);
}

ParamGrads Tape::backward(NodeId root) {
  ParamGrads g = make_grads();
  backward(root, g);
  return g;
}

void Tape::backward(NodeId root, ParamGrads& grads, double seed) {
  if (root < 0 || root >= static_cast<NodeId>(nodes_.size()))
    throw std::invalid_argument("backward: root not on tape");
  if (nodes_[static_cast<size_t>(root)].vec >= 0)
    throw std::invalid_argument("backward: root must be a scalar node");
  std::fill(adj_.begin(), adj_.begin() + root + 1, 0.0);
  for (std::int32_t i = 0; i < vec_used_; ++i) vec_adjs_[static_cast<size_t>(i)].setZero();
  adj_[static_cast<size_t>(root)] = seed;

  const int S = layout_.slots;
  const int d = layout_.dim;
  const int hs0 = 1 + d;

  for (NodeId id = root; id >= 0; --id) {
    const Node& n = nodes_[static_cast<size_t>(id)];
    const double g = adj_[static_cast<size_t>(id)];
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
        break;
      case Op::kParam:
        if (g != 0.0) {
          const Slot& s = slots_[static_cast<size_t>(n.b)];
          grads.slots[static_cast<size_t>(n.b)](n.c / s.cols, n.c % s.cols) += g;
        }
        break;
      case Op::kAffine: {
        const Node& zn = nodes_[static_cast<size_t>(n.a)];
        const RowMat& zin = vec_val(zn.vec);
        const RowMat& abar = vec_adj(n.vec);
        const Slot& ws = slots_[static_cast<size_t>(n.b)];
        Eigen::Map<const Eigen::MatrixXd> W(ws.values, ws.rows, ws.cols);
        vec_adj(zn.vec).noalias() += abar * W;
        grads.slots[static_cast<size_t>(n.b)].noalias() += abar.transpose() * zin;
        if (n.c >= 0) {
          using StrideT = Eigen::Stride<Eigen::Dynamic, 1>;
          Eigen::Map<const RowMat, 0, StrideT> vrows(abar.data(), abar.rows() / S, abar.cols(),
                                                     StrideT(S * abar.cols(), 1));
          grads.slots[static_cast<size_t>(n.c)].noalias() += vrows.colwise().sum().transpose();
        }
        break;
      }
      case Op::kAct: {
        const Activation act = n.aux == 0.0 ? Activation::relu2 : Activation::tanh;
        const Node& zn = nodes_[static_cast<size_t>(n.a)];
        const RowMat& zin = vec_val(zn.vec);
        RowMat& zadj = vec_adj(zn.vec);
        const RowMat& abar = vec_adj(n.vec);
        if (d == 0) {
          if (act == Activation::relu2) {
            zadj.array() += abar.array() * 2.0 * zin.array().max(0.0);
          } else {
            zadj.array() += abar.array() * (1.0 - zin.array().tanh().square());
          }
          break;
        }
        const Eigen::Index npts = zin.rows() / S;
        const Eigen::Index m = zin.cols();
        for (Eigen::Index p = 0; p < npts; ++p) {
          const Eigen::Index base = p * S;
          for (Eigen::Index j = 0; j < m; ++j) {
            const double v = zin(base, j);
            const auto dv = act_derivs(act, v);
            double gg[3];
            for (int k = 0; k < d; ++k) gg[k] = zin(base + 1 + k, j);
            double vbar = abar(base, j) * dv.s1;
            double gbar[3] = {0, 0, 0};
            for (int k = 0; k < d; ++k) {
              const double a = abar(base + 1 + k, j);
              vbar += a * dv.s2 * gg[k];
              gbar[k] += a * dv.s1;
            }
            int h = 0;
            for (int i = 0; i < d; ++i) {
              for (int k = i; k < d; ++k, ++h) {
                const double a = abar(base + hs0 + h, j);
                if (a == 0.0) continue;
                vbar += a * (dv.s3 * gg[i] * gg[k] + dv.s2 * zin(base + hs0 + h, j));
                if (i == k) {
                  gbar[i] += a * 2.0 * dv.s2 * gg[i];
                } else {
                  gbar[i] += a * dv.s2 * gg[k];
                  gbar[k] += a * dv.s2 * gg[i];
                }
                zadj(base + hs0 + h, j) += a * dv.s1;
              }
            }
            zadj(base, j) += vbar;
            for (int k = 0; k < d; ++k) zadj(base + 1 + k, j) += gbar[k];
          }
        }
        break;
      }
      case Op::kComp: {
        if (g != 0.0) {
          const Node& zn = nodes_[static_cast<size_t>(n.a)];
          vec_adj(zn.vec)(n.b, n.c) += g;
        }
        break;
      }
      case Op::kAdd:
        adj_[static_cast<size_t>(n.a)] += g;
        adj_[static_cast<size_t>(n.b)] += g;
        break;
      case Op::kSub:
        adj_[static_cast<size_t>(n.a)] += g;
        adj_[static_cast<size_t>(n.b)] -= g;
        break;
      case Op::kMul:
        adj_[static_cast<size_t>(n.a)] += g * val_[static_cast<size_t>(n.b)];
        adj_[static_cast<size_t>(n.b)] += g * val_[static_cast<size_t>(n.a)];
        break;
      case Op::kDiv: {
        const double bv = val_[static_cast<size_t>(n.b)];
        adj_[static_cast<size_t>(n.a)] += g / bv;
        adj_[static_cast<size_t>(n.b)] -= g * val_[static_cast<size_t>(id)] / bv;
        break;
      }
      case Op::kNeg:
        adj_[static_cast<size_t>(n.a)] -= g;
        break;
      case Op::kScale:
        adj_[static_cast<size_t>(n.a)] += g * n.aux;
        break;
      case Op::kShift:
        adj_[static_cast<size_t>(n.a)] += g;
        break;
      case Op::kSquare:
        adj_[static_cast<size_t>(n.a)] += g * 2.0 * val_[static_cast<size_t>(n.a)];
        break;
      case Op::kPow: {
        const double x = val_[static_cast<size_t>(n.a)];
        if (x > 0.0) adj_[static_cast<size_t>(n.a)] += g * n.aux * std::pow(x, n.aux - 1.0);
        // x == 0: clamped subgradient 0
        break;
      }
      case Op::kLog:
        adj_[static_cast<size_t>(n.a)] += g / val_[static_cast<size_t>(n.a)];
        break;
      case Op::kSqrt: {
        const double r = val_[static_cast<size_t>(id)];
        if (r > 0.0) adj_[static_cast<size_t>(n.a)] += g * 0.5 / r;
        break;
      }
      case Op::kExp:
        adj_[static_cast<size_t>(n.a)] += g * val_[static_cast<size_t>(id)];
        break;
      case Op::kMax0:
        if (val_[static_cast<size_t>(n.a)] > 0.0) adj_[static_cast<size_t>(n.a)] += g;
        break;
      case Op::kMean: {
        const double w = g / static_cast<double>(n.b);
        for (NodeId k = 0; k < n.b; ++k)
          adj_[static_cast<size_t>(operand_buf_[static_cast<size_t>(n.a + k)])] += w;
        break;
      }
      case Op::kSum:
        for (NodeId k = 0; k < n.b; ++k)
          adj_[static_cast<size_t>(operand_buf_[static_cast<size_t>(n.a + k)])] += g;
        break;
    }
  }
}

}  // namespace pinnobs
