#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "pinnobs/jet.hpp"

namespace pinnobs {

using NodeId = std::int32_t;
constexpr NodeId kNoNode = -1;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Gradient accumulator mirroring the parameter slots registered on a Tape.
struct ParamGrads {
  std::vector<Eigen::MatrixXd> slots;
  void set_zero() {
    for (auto& m : slots) m.setZero();
  }
  void axpy(double a, const ParamGrads& other) {
    for (size_t i = 0; i < slots.size(); ++i) slots[i] += a * other.slots[i];
  }
  double squared_norm() const {
    double s = 0;
    for (const auto& m : slots) s += m.squaredNorm();
    return s;
  }
  bool finite() const {
    for (const auto& m : slots)
      if (!m.allFinite()) return false;
    return true;
  }
};

/// Append-only record of primitive operations.
///
/// Two node families share one id space: scalar nodes (loss assembly,
/// pointwise physics terms) and batched jet-block nodes (network layers,
/// where each node holds an (npts*slots) x width matrix of values). The
/// reverse pass walks ids in descending order, so topological order holds by
/// construction, and every node is touched at most once per backward call.
///
/// Parameter slots are registered once and viewed by reference; a backward
/// pass accumulates d(root)/d(theta) into a ParamGrads whose layout mirrors
/// the slots. The tape is rebuilt each training iteration; reset() keeps the
/// allocated storage for reuse.
class Tape {
 public:
  explicit Tape(JetLayout layout) : layout_(layout) {}

  JetLayout layout() const { return layout_; }

  /// Clears all nodes (parameter slots are kept).
  void reset();

  // ---- parameter slots -----------------------------------------------
  int add_slot(int rows, int cols, const double* values);
  int slot_count() const { return static_cast<int>(slots_.size()); }
  ParamGrads make_grads() const;

  // ---- leaves ----------------------------------------------------------
  NodeId constant(double v);
  /// Scalar view into a parameter slot entry (row-major flat index).
  NodeId param(int slot, int flat_index = 0);
  /// Batch of input points (npts x dim); jets seeded with grad = e_k, hess = 0.
  NodeId input_batch(const Eigen::Ref<const RowMat>& points);

  // ---- batched network primitives --------------------------------------
  /// out = W z + b applied slot-wise: values get the bias, derivative slots
  /// are mapped linearly. W and b are parameter slots.
  NodeId affine(int w_slot, int b_slot, NodeId z);
  NodeId activation(Activation act, NodeId z);
  /// Extract one jet slot of one neuron at one point as a scalar node.
  NodeId comp(NodeId z, int point, int neuron, int slot);
  Jet jet_of(NodeId z, int point, int neuron = 0) const;
  int batch_points(NodeId z) const;

  // ---- scalar primitives ------------------------------------------------
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId div(NodeId a, NodeId b);
  NodeId neg(NodeId a);
  NodeId scale(NodeId a, double c);   // c * a
  NodeId shift(NodeId a, double c);   // a + c
  NodeId square(NodeId a);
  NodeId pow_const(NodeId a, double e);
  NodeId log(NodeId a);
  NodeId sqrt(NodeId a);
  NodeId exp(NodeId a);
  NodeId max0(NodeId a);
  NodeId mean(std::span<const NodeId> xs);
  NodeId sum(std::span<const NodeId> xs);

  double value(NodeId id) const { return val_[static_cast<size_t>(id)]; }
  size_t node_count() const { return nodes_.size(); }

  // ---- reverse pass -------------------------------------------------------
  /// Accumulates seed * d(root)/d(theta) into grads. Adjoints are zeroed on
  /// entry, node values are untouched, so the pass can be repeated.
  void backward(NodeId root, ParamGrads& grads, double seed = 1.0);
  ParamGrads backward(NodeId root);

 private:
  enum class Op : std::uint8_t {
    kConst, kParam, kInput, kAffine, kAct, kComp,
    kAdd, kSub, kMul, kDiv, kNeg, kScale, kShift,
    kSquare, kPow, kLog, kSqrt, kExp, kMax0, kMean, kSum,
  };

  struct Node {
    Op op;
    NodeId a = kNoNode, b = kNoNode, c = kNoNode;
    std::int32_t vec = -1;  // index into the jet-block pool, -1 for scalars
    double aux = 0.0;
  };

  struct Slot {
    int rows, cols;
    const double* values;
  };

  NodeId push(Node n, double value);
  RowMat& vec_val(std::int32_t i) { return vec_vals_[static_cast<size_t>(i)]; }
  const RowMat& vec_val(std::int32_t i) const { return vec_vals_[static_cast<size_t>(i)]; }
  RowMat& vec_adj(std::int32_t i) { return vec_adjs_[static_cast<size_t>(i)]; }
  std::int32_t alloc_vec(Eigen::Index rows, Eigen::Index cols);

  JetLayout layout_;
  std::vector<Node> nodes_;
  std::vector<double> val_;
  std::vector<double> adj_;
  std::vector<NodeId> operand_buf_;
  std::vector<Slot> slots_;
  std::vector<RowMat> vec_vals_;
  std::vector<RowMat> vec_adjs_;
  std::int32_t vec_used_ = 0;
};

}  // namespace pinnobs
