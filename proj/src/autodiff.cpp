#include "dcs/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace dcs::nn {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape != b.shape)
    throw std::invalid_argument(std::string(what) + ": shape mismatch [" +
                                std::to_string(a.rows()) + "," + std::to_string(a.cols()) +
                                "] vs [" + std::to_string(b.rows()) + "," +
                                std::to_string(b.cols()) + "]");
}

}  // namespace

Var Graph::push(Node n) {
  if (nodes_.size() >= UINT32_MAX) throw std::runtime_error("graph too large");
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

bool Graph::any_needs_grad(std::span<const Var> vs) const {
  for (Var v : vs)
    if (at(v).needs_grad) return true;
  return false;
}

Var Graph::input(Tensor t) {
  Node n;
  n.op = Op::Leaf;
  n.needs_grad = true;
  n.value = std::move(t);
  return push(std::move(n));
}

Var Graph::constant(Tensor t) {
  Node n;
  n.op = Op::Leaf;
  n.needs_grad = false;
  n.value = std::move(t);
  return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (ta.cols() != tb.rows())
    throw std::invalid_argument("matmul: inner dimensions disagree");
  const std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
  Node node;
  node.op = Op::MatMul;
  node.inputs = {a.idx, b.idx};
  node.needs_grad = at(a).needs_grad || at(b).needs_grad;
  node.value = Tensor(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      const double av = ta.values[i * k + l];
      if (av == 0.0) continue;
      const double* brow = &tb.values[l * n];
      double* orow = &node.value.values[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  return push(std::move(node));
}

Var Graph::add(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  check_same_shape(ta, tb, "add");
  Node node;
  node.op = Op::Add;
  node.inputs = {a.idx, b.idx};
  node.needs_grad = at(a).needs_grad || at(b).needs_grad;
  node.value = ta;
  for (std::size_t i = 0; i < tb.numel(); ++i) node.value.values[i] += tb.values[i];
  return push(std::move(node));
}

Var Graph::add_row(Var a, Var bias) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(bias).value;
  if (tb.rows() != 1 || tb.cols() != ta.cols())
    throw std::invalid_argument("add_row: bias must be [1, cols]");
  Node node;
  node.op = Op::AddRow;
  node.inputs = {a.idx, bias.idx};
  node.needs_grad = at(a).needs_grad || at(bias).needs_grad;
  node.value = ta;
  for (std::size_t i = 0; i < ta.rows(); ++i)
    for (std::size_t j = 0; j < ta.cols(); ++j)
      node.value.values[i * ta.cols() + j] += tb.values[j];
  return push(std::move(node));
}

Var Graph::sub(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  check_same_shape(ta, tb, "sub");
  Node node;
  node.op = Op::Sub;
  node.inputs = {a.idx, b.idx};
  node.needs_grad = at(a).needs_grad || at(b).needs_grad;
  node.value = ta;
  for (std::size_t i = 0; i < tb.numel(); ++i) node.value.values[i] -= tb.values[i];
  return push(std::move(node));
}

Var Graph::mul(Var a, Var b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  check_same_shape(ta, tb, "mul");
  Node node;
  node.op = Op::Mul;
  node.inputs = {a.idx, b.idx};
  node.needs_grad = at(a).needs_grad || at(b).needs_grad;
  node.value = ta;
  for (std::size_t i = 0; i < tb.numel(); ++i) node.value.values[i] *= tb.values[i];
  return push(std::move(node));
}

Var Graph::scale(Var a, double s) {
  Node node;
  node.op = Op::Scale;
  node.inputs = {a.idx};
  node.needs_grad = at(a).needs_grad;
  node.scalar = s;
  node.value = at(a).value;
  for (double& v : node.value.values) v *= s;
  return push(std::move(node));
}

Var Graph::sigmoid(Var a) {
  Node node;
  node.op = Op::Sigmoid;
  node.inputs = {a.idx};
  node.needs_grad = at(a).needs_grad;
  node.value = at(a).value;
  for (double& v : node.value.values) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(node));
}

Var Graph::tanh(Var a) {
  Node node;
  node.op = Op::Tanh;
  node.inputs = {a.idx};
  node.needs_grad = at(a).needs_grad;
  node.value = at(a).value;
  for (double& v : node.value.values) v = std::tanh(v);
  return push(std::move(node));
}

Var Graph::relu(Var a) {
  Node node;
  node.op = Op::Relu;
  node.inputs = {a.idx};
  node.needs_grad = at(a).needs_grad;
  node.value = at(a).value;
  for (double& v : node.value.values) v = v > 0.0 ? v : 0.0;
  return push(std::move(node));
}

Var Graph::exp(Var a) {
  Node node;
  node.op = Op::Exp;
  node.inputs = {a.idx};
  node.needs_grad = at(a).needs_grad;
  node.value = at(a).value;
  for (double& v : node.value.values) v = std::exp(v);
  return push(std::move(node));
}

Var Graph::sum(Var a) {
  Node node;
  node.op = Op::Sum;
  node.inputs = {a.idx};
  node.needs_grad = at(a).needs_grad;
  double acc = 0.0;
  for (double v : at(a).value.values) acc += v;
  node.value = Tensor::scalar(acc);
  return push(std::move(node));
}

Var Graph::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const std::size_t m = at(parts[0]).value.rows();
  std::size_t total = 0;
  for (Var p : parts) {
    if (at(p).value.rows() != m) throw std::invalid_argument("concat_cols: row mismatch");
    total += at(p).value.cols();
  }
  Node node;
  node.op = Op::ConcatCols;
  node.needs_grad = any_needs_grad(parts);
  for (Var p : parts) node.inputs.push_back(p.idx);
  node.value = Tensor(m, total);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& t = at(p).value;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < t.cols(); ++j)
        node.value.values[i * total + off + j] = t.values[i * t.cols() + j];
    off += t.cols();
  }
  return push(std::move(node));
}

Var Graph::stack_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("stack_rows: no inputs");
  const std::size_t c = at(parts[0]).value.cols();
  std::size_t total = 0;
  for (Var p : parts) {
    if (at(p).value.cols() != c) throw std::invalid_argument("stack_rows: column mismatch");
    total += at(p).value.rows();
  }
  Node node;
  node.op = Op::StackRows;
  node.needs_grad = any_needs_grad(parts);
  for (Var p : parts) node.inputs.push_back(p.idx);
  node.value = Tensor(total, c);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& t = at(p).value;
    std::copy(t.values.begin(), t.values.end(), node.value.values.begin() + off * c);
    off += t.rows();
  }
  return push(std::move(node));
}

Var Graph::unstack_columns(Var x, std::size_t rows, std::size_t cols) {
  const Tensor& t = at(x).value;
  if (t.cols() != 1 || t.rows() != rows * cols)
    throw std::invalid_argument("unstack_columns: expected [rows*cols, 1] input");
  Node node;
  node.op = Op::UnstackCols;
  node.inputs = {x.idx};
  node.needs_grad = at(x).needs_grad;
  node.value = Tensor(rows, cols);
  for (std::size_t l = 0; l < cols; ++l)
    for (std::size_t i = 0; i < rows; ++i)
      node.value.values[i * cols + l] = t.values[l * rows + i];
  return push(std::move(node));
}

Var Graph::gather_interp(Var matrix, std::vector<InterpQuery> queries) {
  const Tensor& m = at(matrix).value;
  for (const auto& q : queries) {
    if (q.row >= m.rows() || q.lo >= m.cols() ||
        (q.hi != InterpQuery::npos && q.hi >= m.cols()))
      throw std::invalid_argument("gather_interp: query out of range");
  }
  Node node;
  node.op = Op::GatherInterp;
  node.inputs = {matrix.idx};
  node.needs_grad = at(matrix).needs_grad;
  node.value = Tensor(queries.size(), 1);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    double v = q.offset + q.w_lo * m.at(q.row, q.lo);
    if (q.hi != InterpQuery::npos) v += q.w_hi * m.at(q.row, q.hi);
    node.value.values[i] = v;
  }
  node.queries = std::move(queries);
  return push(std::move(node));
}

Var Graph::cumprod_one_minus(Var x) {
  const Tensor& t = at(x).value;
  Node node;
  node.op = Op::CumprodOneMinus;
  node.inputs = {x.idx};
  node.needs_grad = at(x).needs_grad;
  node.value = Tensor(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < t.cols(); ++j) {
      p *= 1.0 - t.values[i * t.cols() + j];
      node.value.values[i * t.cols() + j] = p;
    }
  }
  return push(std::move(node));
}

void Graph::backward(Var loss) {
  Node& ln = at(loss);
  if (ln.value.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
  for (Node& n : nodes_) n.grad.assign(n.value.numel(), 0.0);
  ln.grad[0] = 1.0;

  for (std::size_t ni = loss.idx + 1; ni-- > 0;) {
    Node& n = nodes_[ni];
    if (!n.needs_grad || n.op == Op::Leaf) continue;
    const std::vector<double>& g = n.grad;
    switch (n.op) {
      case Op::MatMul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        const std::size_t m = a.value.rows(), k = a.value.cols(), c = b.value.cols();
        if (a.needs_grad) {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < c; ++j) {
              const double gv = g[i * c + j];
              if (gv == 0.0) continue;
              for (std::size_t l = 0; l < k; ++l)
                a.grad[i * k + l] += gv * b.value.values[l * c + j];
            }
        }
        if (b.needs_grad) {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t l = 0; l < k; ++l) {
              const double av = a.value.values[i * k + l];
              if (av == 0.0) continue;
              for (std::size_t j = 0; j < c; ++j)
                b.grad[l * c + j] += av * g[i * c + j];
            }
        }
        break;
      }
      case Op::Add: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) a.grad[i] += g[i];
        if (b.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) b.grad[i] += g[i];
        break;
      }
      case Op::AddRow: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        const std::size_t cols = n.value.cols();
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) a.grad[i] += g[i];
        if (b.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) b.grad[i % cols] += g[i];
        break;
      }
      case Op::Sub: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) a.grad[i] += g[i];
        if (b.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) b.grad[i] -= g[i];
        break;
      }
      case Op::Mul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) a.grad[i] += g[i] * b.value.values[i];
        if (b.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) b.grad[i] += g[i] * a.value.values[i];
        break;
      }
      case Op::Scale: {
        Node& a = nodes_[n.inputs[0]];
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) a.grad[i] += g[i] * n.scalar;
        break;
      }
      case Op::Sigmoid: {
        Node& a = nodes_[n.inputs[0]];
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = n.value.values[i];
            a.grad[i] += g[i] * y * (1.0 - y);
          }
        break;
      }
      case Op::Tanh: {
        Node& a = nodes_[n.inputs[0]];
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = n.value.values[i];
            a.grad[i] += g[i] * (1.0 - y * y);
          }
        break;
      }
      case Op::Relu: {
        Node& a = nodes_[n.inputs[0]];
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i)
            if (a.value.values[i] > 0.0) a.grad[i] += g[i];
        break;
      }
      case Op::Exp: {
        Node& a = nodes_[n.inputs[0]];
        if (a.needs_grad)
          for (std::size_t i = 0; i < g.size(); ++i) a.grad[i] += g[i] * n.value.values[i];
        break;
      }
      case Op::Sum: {
        Node& a = nodes_[n.inputs[0]];
        if (a.needs_grad)
          for (double& gv : a.grad) gv += g[0];
        break;
      }
      case Op::ConcatCols: {
        const std::size_t m = n.value.rows(), total = n.value.cols();
        std::size_t off = 0;
        for (std::uint32_t in : n.inputs) {
          Node& a = nodes_[in];
          const std::size_t c = a.value.cols();
          if (a.needs_grad)
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t j = 0; j < c; ++j)
                a.grad[i * c + j] += g[i * total + off + j];
          off += c;
        }
        break;
      }
      case Op::StackRows: {
        const std::size_t c = n.value.cols();
        std::size_t off = 0;
        for (std::uint32_t in : n.inputs) {
          Node& a = nodes_[in];
          if (a.needs_grad)
            for (std::size_t i = 0; i < a.grad.size(); ++i) a.grad[i] += g[off * c + i];
          off += a.value.rows();
        }
        break;
      }
      case Op::UnstackCols: {
        Node& a = nodes_[n.inputs[0]];
        const std::size_t rows = n.value.rows(), cols = n.value.cols();
        if (a.needs_grad)
          for (std::size_t l = 0; l < cols; ++l)
            for (std::size_t i = 0; i < rows; ++i)
              a.grad[l * rows + i] += g[i * cols + l];
        break;
      }
      case Op::GatherInterp: {
        Node& a = nodes_[n.inputs[0]];
        const std::size_t cols = a.value.cols();
        if (a.needs_grad)
          for (std::size_t i = 0; i < n.queries.size(); ++i) {
            const auto& q = n.queries[i];
            a.grad[q.row * cols + q.lo] += g[i] * q.w_lo;
            if (q.hi != InterpQuery::npos) a.grad[q.row * cols + q.hi] += g[i] * q.w_hi;
          }
        break;
      }
      case Op::CumprodOneMinus: {
        Node& a = nodes_[n.inputs[0]];
        if (!a.needs_grad) break;
        const std::size_t rows = n.value.rows(), cols = n.value.cols();
        // dS_l/dh_j = -prod_{k<=l, k!=j} (1-h_k) for j <= l. Accumulated via
        // a suffix recurrence T_j = gs_j + (1-h_{j+1}) T_{j+1} and prefix
        // products, avoiding division by possibly tiny (1-h_j).
        std::vector<double> tails(cols);
        for (std::size_t i = 0; i < rows; ++i) {
          const double* h = &a.value.values[i * cols];
          const double* gs = &g[i * cols];
          double* gh = &a.grad[i * cols];
          double t = 0.0;
          for (std::size_t j = cols; j-- > 0;) {
            t = gs[j] + (j + 1 < cols ? (1.0 - h[j + 1]) * t : 0.0);
            tails[j] = t;
          }
          double prefix = 1.0;  // prod_{k<j} (1-h_k)
          for (std::size_t j = 0; j < cols; ++j) {
            gh[j] -= prefix * tails[j];
            prefix *= 1.0 - h[j];
          }
        }
        break;
      }
      case Op::Leaf:
        break;
    }
  }
}

}  // namespace dcs::nn
