#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dcs/autodiff.hpp"

namespace dcs::nn {

/// Named tensor; checkpointing rejects non-finite values.
struct Parameter {
  std::string name;
  Tensor value;
};

/// Ordered parameter collection. Order is fixed at construction and defines
/// the checkpoint layout and the gradient vector layout.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  std::size_t numel() const;
  const Parameter* find(const std::string& name) const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
};

/// Uniform Glorot-style init on [-sqrt(6/(fan_in+fan_out)), +).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

/// x W + b with W [in,out], b [1,out]. Activation is the caller's business.
Var dense(Graph& g, Var x, Var weights, Var bias);

struct LstmGateVars {
  Var w;  // input weights   [in, hidden]
  Var r;  // recurrent weights [hidden, hidden]
  Var b;  // bias [1, hidden]
};

struct LstmVars {
  LstmGateVars input_gate, forget_gate, cell_gate, output_gate;
};

/// Standard LSTM over a per-step input sequence (each step [batch, in]).
/// Initial hidden and cell states are zero. reverse=true consumes the steps
/// back to front and returns outputs re-aligned with the input order.
std::vector<Var> lstm_forward(Graph& g, const std::vector<Var>& steps,
                              const LstmVars& p, bool reverse = false);

/// Forward and reversed-direction passes concatenated per step.
std::vector<Var> bilstm_forward(Graph& g, const std::vector<Var>& steps,
                                const LstmVars& fwd, const LstmVars& bwd);

/// Inverted dropout: scales kept activations by 1/(1-rate). Identity when
/// training is false or rate is zero. Mask draws come from `rng` in row-major
/// element order, one uniform_unit per element.
Var dropout(Graph& g, Var x, double rate, bool training, std::mt19937_64& rng);

/// Adam with bias correction. State tensors mirror the parameter layout.
class Adam {
 public:
  Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// One update over every parameter. grads[i] must match params[i] in size.
  /// Throws std::runtime_error on a non-finite gradient.
  void step(ParameterSet& params, const std::vector<std::vector<double>>& grads);

  std::uint64_t steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace dcs::nn
