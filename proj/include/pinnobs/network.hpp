#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pinnobs/tape.hpp"

namespace pinnobs {

struct ArchitectureSpec {
  int input_dim = 2;  // 2: (t,x), 3: (t,x,y)
  int hidden_layers = 5;
  int width = 128;
  Activation activation = Activation::relu2;
  int output_dim = 1;

  void validate() const;
  bool operator==(const ArchitectureSpec&) const = default;
};

/// Layer weights and biases of a fully-connected network.
///
/// Layer l maps width_in(l) -> width_out(l); weights are drawn uniformly from
/// (-1/sqrt(fan_in), 1/sqrt(fan_in)) and biases start at zero. The instance
/// records the seed used at init so a run can be reproduced.
struct NetworkParams {
  ArchitectureSpec spec;
  std::uint64_t rng_seed = 0;
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;

  int layer_count() const { return spec.hidden_layers + 1; }
  long parameter_count() const;
  bool finite() const;
};

/// init_gain scales the uniform half-width 1/sqrt(fan_in); the default 1.0
/// is the plain rule (weights in (-1/sqrt(fan_in), 1/sqrt(fan_in)), zero
/// biases). Exposed for reproducibility experiments.
NetworkParams init_params(const ArchitectureSpec& spec, std::uint64_t seed,
                          double init_gain = 1.0);

/// Gradient buffer in canonical slot order (W0, b0, W1, b1, ...).
ParamGrads make_param_grads(const NetworkParams& params);

/// Tape wired to a fixed parameter set; rebuilt (reset + forward) every call.
/// The referenced NetworkParams must outlive the NetTape and keep its layer
/// storage in place (in-place optimizer updates are fine).
class NetTape {
 public:
  NetTape(const NetworkParams& params, JetLayout layout);
  /// Forward pass over a batch of points (npts x input_dim, or raw feature
  /// rows in value-only layout). Returns the output batch node.
  NodeId run(const Eigen::Ref<const RowMat>& points);
  Tape& tape() { return tape_; }
  const NetworkParams& params() const { return *params_; }

 private:
  const NetworkParams* params_;
  Tape tape_;
  std::vector<int> w_slots_, b_slots_;
};

/// Output jet (value, input gradient, input Hessian) at one point.
Jet forward_jets(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& point);

/// Network output at one point. Shares the jet code path, so it equals
/// forward_jets(...).value exactly.
double forward_value(const NetworkParams& params, const Eigen::Ref<const Eigen::VectorXd>& point);

/// Batched value-only evaluation (no tape, no derivative slots); used for
/// metrics and solution grids.
Eigen::VectorXd eval_values(const NetworkParams& params, const Eigen::Ref<const RowMat>& points);

// Parameter checkpoint container: versioned text header (architecture + seed)
// followed by layer-ordered row-major weights. Stable across releases.
void save_checkpoint(const NetworkParams& params, const std::string& path);
NetworkParams load_checkpoint(const std::string& path);

}  // namespace pinnobs
