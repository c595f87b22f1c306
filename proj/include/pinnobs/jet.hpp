#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pinnobs {

/// Activation functions supported by the network layers.
enum class Activation { relu2, tanh };

inline const char* activation_name(Activation a) {
  return a == Activation::relu2 ? "relu2" : "tanh";
}

/// Layout of the derivative slots carried alongside each forward value.
///
/// A "jet" over d inputs stores the value, the d first partials and the
/// d(d+1)/2 distinct entries of the symmetric input Hessian (upper triangle,
/// row-wise). Value-only evaluation uses a single slot.
struct JetLayout {
  int dim = 0;    // number of network inputs tracked (0 = value-only)
  int slots = 1;  // 1 + dim + dim*(dim+1)/2 when dim > 0

  static JetLayout value_only() { return JetLayout{0, 1}; }
  static JetLayout full(int d) {
    if (d != 2 && d != 3) throw std::invalid_argument("JetLayout: dim must be 2 or 3");
    return JetLayout{d, 1 + d + d * (d + 1) / 2};
  }

  int grad_slot(int k) const { return 1 + k; }
  // Upper-triangle index of the (i,j) Hessian entry, i <= j.
  int hess_slot(int i, int j) const {
    if (i > j) std::swap(i, j);
    // row-wise upper triangle: offset of row i is i*dim - i*(i-1)/2
    return 1 + dim + i * dim - i * (i - 1) / 2 + (j - i);
  }
};

/// Value plus exact first/second derivatives with respect to the network
/// inputs, in (t, x[, y]) ordering (time is always coordinate 0).
struct Jet {
  int dim = 2;
  double value = 0.0;
  std::array<double, 3> grad{{0, 0, 0}};
  std::array<double, 6> hess{{0, 0, 0, 0, 0, 0}};  // upper triangle, row-wise

  double hess_at(int i, int j) const {
    if (i > j) std::swap(i, j);
    return hess[static_cast<size_t>(i * dim - i * (i - 1) / 2 + (j - i))];
  }
  double& hess_ref(int i, int j) {
    if (i > j) std::swap(i, j);
    return hess[static_cast<size_t>(i * dim - i * (i - 1) / 2 + (j - i))];
  }
  /// Trace of the spatial block of the Hessian (coordinates 1..dim-1).
  double laplacian() const {
    double s = 0.0;
    for (int k = 1; k < dim; ++k) s += hess_at(k, k);
    return s;
  }
};

/// Raised by taped primitives on out-of-domain arguments (log of a
/// non-positive value, fractional powers of negatives, ...).
struct NumericDomainError : std::runtime_error {
  long node = -1;
  NumericDomainError(const std::string& what, long node_id)
      : std::runtime_error(what + " (node " + std::to_string(node_id) + ")"), node(node_id) {}
};

}  // namespace pinnobs
