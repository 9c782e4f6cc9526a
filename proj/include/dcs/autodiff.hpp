#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dcs::nn {

/// Dense row-major 2-D array of 64-bit reals. Scalars are [1,1].
struct Tensor {
  std::vector<std::size_t> shape;  // always two dims
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape{rows, cols}, values(rows * cols, fill) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.values[0] = v;
    return t;
  }
  static Tensor row(const std::vector<double>& v) {
    Tensor t(1, v.size());
    t.values = v;
    return t;
  }

  std::size_t rows() const { return shape[0]; }
  std::size_t cols() const { return shape[1]; }
  std::size_t numel() const { return values.size(); }
  double& at(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }
};

/// Handle into a Graph's tape.
struct Var {
  std::uint32_t idx = 0;
};

/// One linear-combination query into a curve matrix:
///   out = offset + w_lo * M[row, lo] (+ w_hi * M[row, hi] if hi != npos)
struct InterpQuery {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t row = 0;
  std::size_t lo = 0;
  std::size_t hi = npos;
  double w_lo = 0.0;
  double w_hi = 0.0;
  double offset = 0.0;
};

/// Define-by-run reverse-mode tape. Forward values are computed at node
/// creation; backward() accumulates gradients for every node that depends
/// on an input() leaf. A graph instance is single-threaded; build one per
/// forward/backward pass.
class Graph {
 public:
  /// Differentiable leaf.
  Var input(Tensor t);
  /// Non-differentiable leaf (targets, masks, initial states...).
  Var constant(Tensor t);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// [m,n] + [1,n] row broadcast (bias add).
  Var add_row(Var a, Var bias);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var exp(Var a);
  /// Full reduction to a [1,1] scalar.
  Var sum(Var a);
  Var concat_cols(std::span<const Var> parts);
  /// Vertical concatenation; all parts share a column count.
  Var stack_rows(std::span<const Var> parts);
  /// Inverse of aggregating a step-major stack: x is [cols*rows, 1] and
  /// out[i, l] = x[l*rows + i].
  Var unstack_columns(Var x, std::size_t rows, std::size_t cols);
  Var gather_interp(Var matrix, std::vector<InterpQuery> queries);
  /// out[i, l] = prod_{j<=l} (1 - x[i, j]).
  Var cumprod_one_minus(Var x);

  /// Reverse accumulation from a scalar loss. Throws if loss is not [1,1].
  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[v.idx].value; }
  /// Valid after backward(); zero for nodes the loss does not depend on.
  const std::vector<double>& grad(Var v) const { return nodes_[v.idx].grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    Leaf,
    MatMul,
    Add,
    AddRow,
    Sub,
    Mul,
    Scale,
    Sigmoid,
    Tanh,
    Relu,
    Exp,
    Sum,
    ConcatCols,
    StackRows,
    UnstackCols,
    GatherInterp,
    CumprodOneMinus,
  };

  struct Node {
    Op op = Op::Leaf;
    bool needs_grad = false;
    double scalar = 0.0;
    std::vector<std::uint32_t> inputs;
    std::vector<InterpQuery> queries;
    Tensor value;
    std::vector<double> grad;
  };

  Var push(Node n);
  Node& at(Var v) { return nodes_[v.idx]; }
  const Node& at(Var v) const { return nodes_[v.idx]; }
  bool any_needs_grad(std::span<const Var> vs) const;

  std::vector<Node> nodes_;
};

}  // namespace dcs::nn
