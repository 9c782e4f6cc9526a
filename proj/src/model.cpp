#include "dcs/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dcs/random.hpp"

namespace dcs {

void ModelConfig::validate() const {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw std::invalid_argument("model: dropout_rate must lie in [0,1)");
  for (auto w : encoder_layers)
    if (w == 0) throw std::invalid_argument("model: encoder width must be positive");
  for (auto w : decoder_layers)
    if (w == 0) throw std::invalid_argument("model: decoder width must be positive");
  for (auto w : aggregation_layers)
    if (w == 0) throw std::invalid_argument("model: aggregation width must be positive");
  if (grid.num_nodes < 2) throw std::invalid_argument("model: grid needs at least 2 nodes");
  if (loss.lambda < 0.0) throw std::invalid_argument("model: lambda must be non-negative");
  if (!(loss.sigma > 0.0)) throw std::invalid_argument("model: sigma must be positive");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be at least 1");
  if (early_stop_patience < 1) throw std::invalid_argument("train: patience must be at least 1");
  if (max_epochs < 1) throw std::invalid_argument("train: max_epochs must be at least 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("train: validation_fraction must lie in (0,1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
}

DcsNetwork::DcsNetwork(const ModelConfig& cfg, std::size_t num_features)
    : config_(cfg), num_features_(num_features) {
  config_.validate();
  if (num_features_ == 0) throw std::invalid_argument("model: need at least one feature");
  std::mt19937_64 rng(cfg.seed);
  build_parameters(rng);
}

DcsNetwork::DcsNetwork(const ModelConfig& cfg, std::size_t num_features, nn::ParameterSet params)
    : config_(cfg), num_features_(num_features) {
  config_.validate();
  std::mt19937_64 rng(cfg.seed);
  build_parameters(rng);
  if (params.size() != params_.size())
    throw std::invalid_argument("model: checkpoint has wrong parameter count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != params_[i].name || params[i].value.shape != params_[i].value.shape)
      throw std::invalid_argument("model: checkpoint parameter '" + params[i].name +
                                  "' does not match the configured architecture");
  }
  params_ = std::move(params);
}

void DcsNetwork::build_parameters(std::mt19937_64& rng) {
  std::size_t dim = num_features_;
  for (std::size_t i = 0; i < config_.encoder_layers.size(); ++i) {
    const std::size_t w = config_.encoder_layers[i];
    const std::string base = "encoder." + std::to_string(i);
    params_.add(base + ".weight", nn::glorot_uniform(dim, w, rng));
    params_.add(base + ".bias", nn::Tensor(1, w));
    dim = w;
  }
  const std::size_t encoder_dim = dim;

  for (std::size_t i = 0; i < config_.decoder_layers.size(); ++i) {
    const std::size_t h = config_.decoder_layers[i];
    const auto add_direction = [&](const std::string& dir) {
      const std::string base = "decoder." + std::to_string(i) + "." + dir + ".";
      for (const char* gate : {"input_gate", "forget_gate", "cell_gate", "output_gate"}) {
        params_.add(base + gate + ".w", nn::glorot_uniform(dim, h, rng));
        params_.add(base + gate + ".r", nn::glorot_uniform(h, h, rng));
        params_.add(base + gate + ".b", nn::Tensor(1, h));
      }
    };
    add_direction("fwd");
    if (config_.bidirectional) add_direction("bwd");
    dim = h * (config_.bidirectional ? 2 : 1);
  }

  std::size_t step_dim = config_.decoder_layers.empty() ? encoder_dim : dim;
  if (config_.lstm_skip && !config_.decoder_layers.empty()) step_dim += encoder_dim;

  dim = step_dim;
  for (std::size_t i = 0; i < config_.aggregation_layers.size(); ++i) {
    const std::size_t w = config_.aggregation_layers[i];
    const std::string base = "aggregation." + std::to_string(i);
    params_.add(base + ".weight", nn::glorot_uniform(dim, w, rng));
    params_.add(base + ".bias", nn::Tensor(1, w));
    dim = w;
  }
  params_.add("output.weight", nn::glorot_uniform(dim, 1, rng));
  params_.add("output.bias", nn::Tensor(1, 1));
}

DcsNetwork::ForwardPass DcsNetwork::forward(nn::Graph& g, const nn::Tensor& features,
                                            std::size_t num_nodes, bool training,
                                            std::mt19937_64& dropout_rng) const {
  if (features.cols() != num_features_)
    throw std::invalid_argument("forward: expected " + std::to_string(num_features_) +
                                " features, got " + std::to_string(features.cols()));
  if (num_nodes == 0) throw std::invalid_argument("forward: need at least one output node");

  ForwardPass pass;
  pass.param_vars.reserve(params_.size());
  for (const auto& p : params_) pass.param_vars.push_back(g.input(p.value));
  std::size_t next = 0;
  const auto take = [&]() { return pass.param_vars[next++]; };

  nn::Var x = g.constant(features);
  for (std::size_t i = 0; i < config_.encoder_layers.size(); ++i) {
    const nn::Var w = take();
    const nn::Var b = take();
    x = nn::dropout(g, g.relu(nn::dense(g, x, w, b)), config_.dropout_rate, training,
                    dropout_rng);
  }
  const nn::Var encoded = x;

  // The decoder consumes the encoder output at every step.
  std::vector<nn::Var> steps(num_nodes, encoded);
  if (!config_.decoder_layers.empty()) {
    for (std::size_t i = 0; i < config_.decoder_layers.size(); ++i) {
      const auto take_lstm = [&]() {
        nn::LstmVars v;
        for (nn::LstmGateVars* gate :
             {&v.input_gate, &v.forget_gate, &v.cell_gate, &v.output_gate}) {
          gate->w = take();
          gate->r = take();
          gate->b = take();
        }
        return v;
      };
      const nn::LstmVars fwd = take_lstm();
      if (config_.bidirectional) {
        const nn::LstmVars bwd = take_lstm();
        steps = nn::bilstm_forward(g, steps, fwd, bwd);
      } else {
        steps = nn::lstm_forward(g, steps, fwd);
      }
    }
    if (config_.lstm_skip) {
      for (auto& s : steps) {
        const nn::Var parts[2] = {s, encoded};
        s = g.concat_cols(parts);
      }
    }
  }

  nn::Var stacked = g.stack_rows(steps);
  for (std::size_t i = 0; i < config_.aggregation_layers.size(); ++i) {
    const nn::Var w = take();
    const nn::Var b = take();
    stacked = nn::dropout(g, g.relu(nn::dense(g, stacked, w, b)), config_.dropout_rate,
                          training, dropout_rng);
  }
  const nn::Var w_out = take();
  const nn::Var b_out = take();
  const nn::Var logits = nn::dense(g, stacked, w_out, b_out);  // [L*n, 1]
  pass.hazards = g.unstack_columns(g.sigmoid(logits), features.rows(), num_nodes);
  pass.survival = g.cumprod_one_minus(pass.hazards);
  return pass;
}

namespace {

nn::Tensor features_tensor(const SurvivalDataset& data) {
  nn::Tensor t(data.size(), data.num_features());
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data.num_features(); ++j)
      t.at(i, j) = data.records[i].features[j];
  return t;
}

SurvivalDataset subset(const SurvivalDataset& data, const std::vector<std::size_t>& idx,
                       std::size_t begin, std::size_t end) {
  SurvivalDataset out;
  out.feature_names = data.feature_names;
  out.records.reserve(end - begin);
  for (std::size_t k = begin; k < end; ++k) out.records.push_back(data.records[idx[k]]);
  return out;
}

double evaluate_loss(const DcsNetwork& net, const SurvivalDataset& data, const TimeGrid& grid,
                     const LossConfig& loss_cfg) {
  nn::Graph g;
  std::mt19937_64 unused(0);
  const auto pass = net.forward(g, features_tensor(data), grid.size(), false, unused);
  const nn::Var loss = combined_loss_node(g, pass.survival, data, grid, loss_cfg);
  return g.value(loss).values[0];
}

}  // namespace

TrainResult train(const SurvivalDataset& data, const ModelConfig& mcfg, const TrainConfig& tcfg) {
  mcfg.validate();
  tcfg.validate();
  data.validate();
  if (data.size() < 2) throw std::invalid_argument("train: need at least two records");

  const TimeGrid grid = build_grid(mcfg.grid, data);
  const auto [train_set, val_set] =
      stratified_split(data, tcfg.validation_fraction, mcfg.seed + 3);

  DcsNetwork net(mcfg, data.num_features());
  nn::Adam adam(tcfg.learning_rate);
  std::mt19937_64 shuffle_rng(mcfg.seed + 1);
  std::mt19937_64 dropout_rng(mcfg.seed + 2);

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  nn::ParameterSet best_params = net.params();
  std::size_t epochs_since_best = 0;

  for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    shuffle_inplace(order, shuffle_rng);
    double train_loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
      const SurvivalDataset batch = subset(train_set, order, start, end);

      nn::Graph g;
      const auto pass = net.forward(g, features_tensor(batch), grid.size(), true, dropout_rng);
      const nn::Var loss = combined_loss_node(g, pass.survival, batch, grid, mcfg.loss);
      const double loss_value = g.value(loss).values[0];
      if (!std::isfinite(loss_value))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch starting at record " + std::to_string(start));
      train_loss_sum += loss_value * static_cast<double>(batch.size());

      g.backward(loss);
      std::vector<std::vector<double>> grads;
      grads.reserve(pass.param_vars.size());
      for (nn::Var v : pass.param_vars) grads.push_back(g.grad(v));
      adam.step(net.params(), grads);
    }

    const double val_loss = evaluate_loss(net, val_set, grid, mcfg.loss);
    result.log.push_back(
        {epoch, train_loss_sum / static_cast<double>(train_set.size()), val_loss});

    if (val_loss < best_val) {
      best_val = val_loss;
      best_params = net.params();
      result.best_epoch = epoch;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= tcfg.early_stop_patience) {
      break;
    }
  }

  result.best_val_loss = best_val;
  result.model.config = mcfg;
  result.model.grid = grid;
  result.model.params = std::move(best_params);
  result.model.feature_names = data.feature_names;
  return result;
}

std::vector<HazardSequence> predict_hazards(const TrainedModel& model,
                                            const SurvivalDataset& data) {
  DcsNetwork net(model.config, model.feature_names.empty() ? data.num_features()
                                                           : model.feature_names.size(),
                 model.params);
  nn::Graph g;
  std::mt19937_64 unused(0);
  const auto pass =
      net.forward(g, features_tensor(data), model.grid.size(), false, unused);
  const nn::Tensor& h = g.value(pass.hazards);

  const auto grid = std::make_shared<TimeGrid>(model.grid);
  std::vector<HazardSequence> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i].grid = grid;
    out[i].hazards.assign(h.values.begin() + static_cast<std::ptrdiff_t>(i * h.cols()),
                          h.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * h.cols()));
  }
  return out;
}

std::vector<SurvivalCurve> predict(const TrainedModel& model, const SurvivalDataset& data) {
  std::vector<HazardSequence> hazards = predict_hazards(model, data);
  std::vector<SurvivalCurve> curves;
  curves.reserve(hazards.size());
  for (const auto& h : hazards) curves.push_back(survival_from_hazards(h));
  return curves;
}

}  // namespace dcs
