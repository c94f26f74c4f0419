#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dstgat/numeric/matrix.hpp"

namespace dstgat {

/// A trainable matrix with its accumulated gradient.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Matrix value);

  const std::string& name() const { return name_; }
  void zero_grad() { grad.fill(0.0); }

  Matrix value;
  Matrix grad;

 private:
  std::string name_;
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode computation graph. Nodes are appended in evaluation order, so
/// the node list is already topologically sorted and backward walks it once
/// in reverse.
///
/// A tape constructed with `record = false` only evaluates values; calling
/// backward on it is a contract violation.
class Tape {
 public:
  using BackwardFn =
      std::function<void(Tape&, const Matrix& out_value, const Matrix& out_grad)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Matrix value);
  /// Leaf that receives a gradient but is not a Parameter (inputs under test).
  Var variable(Matrix value);
  /// Registers a parameter leaf; repeated calls return the same node.
  Var parameter(Parameter& p);

  /// Appends an operation node. `backward` receives the node's value and
  /// dLoss/dOutput and must accumulate into its inputs via accumulate().
  Var push(Matrix value, std::span<const Var> inputs, BackwardFn backward);

  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  const Matrix& value(Var v) const { return nodes_[v.id()].value; }

  /// Adds `g` into the gradient buffer of `v` if it requires a gradient.
  void accumulate(Var v, const Matrix& g);
  /// Mutable gradient buffer for `v`, allocated on first use. Only call when
  /// requires_grad(v) holds.
  Matrix& grad_buffer(Var v);

  /// Gradient of the last backward target with respect to `v` (zeros if no
  /// path reached it).
  Matrix grad(Var v) const;

  /// Backpropagates from a scalar (1x1) loss. Parameter leaves receive their
  /// gradient added into Parameter::grad.
  void backward(Var loss);
  /// Vector-Jacobian product: backpropagates `seed` (same shape as `output`).
  void backward(Var output, const Matrix& seed);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* parameter = nullptr;
    BackwardFn backward;
  };

  bool record_;
  bool backward_done_ = false;
  std::deque<Node> nodes_;
  std::unordered_map<Parameter*, std::size_t> param_nodes_;
};

namespace ad {

Var matmul(Var a, Var b);
/// a · bᵀ
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var hadamard(Var a, const Matrix& constant);
Var scale(Var a, double s);
/// Adds a 1 x cols row vector to every row of `a`.
Var add_row(Var a, Var row);
Var sum(Var a);

/// max(x, slope·x) elementwise; the subgradient at 0 is `slope`.
Var leaky_relu(Var x, double slope);
/// Tanh approximation of GELU.
Var gelu(Var x);
Var tanh(Var x);

Var masked_row_softmax(Var scores, const Matrix& mask);

Var concat(Var a, Var b, Axis axis);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
/// Row lookup (embedding); ids may repeat.
Var gather_rows(Var table, std::span<const std::size_t> ids);
/// Row lookup where an empty index yields a zero row.
Var gather_rows_or_zero(Var table, std::span<const std::optional<std::size_t>> ids);
/// Row g of the output is the mean of the table rows listed in groups[g].
Var mean_of_rows(Var table, const std::vector<std::vector<std::size_t>>& groups);

/// Row-wise layer normalization with learned gain and bias (1 x cols each).
Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);

/// Mean softmax cross-entropy over rows of `logits` against `targets`.
Var cross_entropy(Var logits, std::span<const std::size_t> targets);

}  // namespace ad

inline Var operator+(Var a, Var b) { return ad::add(a, b); }
inline Var operator-(Var a, Var b) { return ad::sub(a, b); }
inline Var operator*(Var a, double s) { return ad::scale(a, s); }

}  // namespace dstgat
