#include "dcs/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "dcs/random.hpp"

namespace dcs::nn {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  for (const auto& p : params_)
    if (p.name == name) throw std::invalid_argument("duplicate parameter name: " + name);
  params_.push_back(Parameter{std::move(name), std::move(value)});
  return params_.size() - 1;
}

std::size_t ParameterSet::numel() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Tensor t(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : t.values) v = (2.0 * uniform_unit(rng) - 1.0) * limit;
  return t;
}

Var dense(Graph& g, Var x, Var weights, Var bias) {
  return g.add_row(g.matmul(x, weights), bias);
}

namespace {

Var lstm_step(Graph& g, Var x, Var h_prev, Var c_prev, const LstmVars& p, Var* c_out) {
  auto gate = [&](const LstmGateVars& gv) {
    return g.add_row(g.add(g.matmul(x, gv.w), g.matmul(h_prev, gv.r)), gv.b);
  };
  const Var i = g.sigmoid(gate(p.input_gate));
  const Var f = g.sigmoid(gate(p.forget_gate));
  const Var z = g.tanh(gate(p.cell_gate));
  const Var o = g.sigmoid(gate(p.output_gate));
  const Var c = g.add(g.mul(f, c_prev), g.mul(i, z));
  *c_out = c;
  return g.mul(o, g.tanh(c));
}

}  // namespace

std::vector<Var> lstm_forward(Graph& g, const std::vector<Var>& steps, const LstmVars& p,
                              bool reverse) {
  if (steps.empty()) throw std::invalid_argument("lstm_forward: empty sequence");
  const std::size_t batch = g.value(steps[0]).rows();
  const std::size_t hidden = g.value(p.input_gate.r).rows();
  Var h = g.constant(Tensor(batch, hidden));
  Var c = g.constant(Tensor(batch, hidden));
  std::vector<Var> out(steps.size());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const std::size_t idx = reverse ? steps.size() - 1 - s : s;
    h = lstm_step(g, steps[idx], h, c, p, &c);
    out[idx] = h;
  }
  return out;
}

std::vector<Var> bilstm_forward(Graph& g, const std::vector<Var>& steps, const LstmVars& fwd,
                                const LstmVars& bwd) {
  const std::vector<Var> f = lstm_forward(g, steps, fwd, false);
  const std::vector<Var> b = lstm_forward(g, steps, bwd, true);
  std::vector<Var> out;
  out.reserve(steps.size());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const Var parts[2] = {f[s], b[s]};
    out.push_back(g.concat_cols(parts));
  }
  return out;
}

Var dropout(Graph& g, Var x, double rate, bool training, std::mt19937_64& rng) {
  if (!training || rate == 0.0) return x;
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0,1)");
  const Tensor& v = g.value(x);
  Tensor mask(v.rows(), v.cols());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.values) m = uniform_unit(rng) < rate ? 0.0 : keep_scale;
  return g.mul(x, g.constant(std::move(mask)));
}

void Adam::step(ParameterSet& params, const std::vector<std::vector<double>>& grads) {
  if (grads.size() != params.size())
    throw std::invalid_argument("adam: gradient count does not match parameter count");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].value.numel(), 0.0);
      v_[i].assign(params[i].value.numel(), 0.0);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].value.values;
    const auto& grad = grads[i];
    if (grad.size() != p.size())
      throw std::invalid_argument("adam: gradient size mismatch for " + params[i].name);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = grad[j];
      if (!std::isfinite(gj))
        throw std::runtime_error("adam: non-finite gradient in " + params[i].name);
      m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * gj;
      v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * gj * gj;
      const double mhat = m_[i][j] / bc1;
      const double vhat = v_[i][j] / bc2;
      p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace dcs::nn
