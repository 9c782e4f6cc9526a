#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dcs/core.hpp"
#include "dcs/data.hpp"
#include "dcs/grids.hpp"
#include "dcs/layers.hpp"
#include "dcs/losses.hpp"

namespace dcs {

struct ModelConfig {
  /// Dense widths before the recurrent decoder; empty feeds raw features in.
  std::vector<std::size_t> encoder_layers;
  /// LSTM hidden widths, one per stacked layer; empty skips the decoder and
  /// the encoder output feeds aggregation directly at every node.
  std::vector<std::size_t> decoder_layers;
  bool bidirectional = false;
  /// Concatenate the encoder output to every decoder step output.
  bool lstm_skip = false;
  /// Extra dense widths before the final scalar-per-node layer.
  std::vector<std::size_t> aggregation_layers;
  GridSpec grid;
  LossConfig loss;
  double dropout_rate = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainConfig {
  std::size_t batch_size = 50;
  std::size_t max_epochs = 100;
  std::size_t early_stop_patience = 10;
  double validation_fraction = 0.2;
  double learning_rate = 1e-3;

  void validate() const;
};

/// Encoder -> replicated-input recurrent decoder -> shared per-node
/// aggregation -> sigmoid hazards. The per-step decoder input is the constant
/// encoder output; step distinction comes from the recurrence alone.
class DcsNetwork {
 public:
  /// Fresh Glorot-initialized parameters from cfg.seed.
  DcsNetwork(const ModelConfig& cfg, std::size_t num_features);
  /// Restore from checkpointed parameters (names and shapes are validated).
  DcsNetwork(const ModelConfig& cfg, std::size_t num_features, nn::ParameterSet params);

  struct ForwardPass {
    nn::Var hazards;   // [n, L]
    nn::Var survival;  // [n, L]
    std::vector<nn::Var> param_vars;  // leaves, in parameter order
  };

  /// Builds one forward pass on g. dropout_rng is consumed only when
  /// training is true and dropout_rate > 0.
  ForwardPass forward(nn::Graph& g, const nn::Tensor& features, std::size_t num_nodes,
                      bool training, std::mt19937_64& dropout_rng) const;

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  std::size_t num_features() const { return num_features_; }
  const ModelConfig& config() const { return config_; }

 private:
  void build_parameters(std::mt19937_64& rng);

  ModelConfig config_;
  std::size_t num_features_;
  nn::ParameterSet params_;
};

struct TrainedModel {
  ModelConfig config;
  TimeGrid grid;
  nn::ParameterSet params;
  std::vector<std::string> feature_names;
  /// Attached by the pipeline when the model was trained from raw tables.
  std::optional<PreprocessStats> preprocess;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  TrainedModel model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Minibatch Adam on the combined objective with early stopping on the
/// validation loss; returns the best-validation-epoch parameters. Fully
/// deterministic given cfg.seed: parameter init draws from seed, batch
/// shuffling from seed+1, dropout masks from seed+2 and the internal
/// validation split from seed+3.
TrainResult train(const SurvivalDataset& data, const ModelConfig& mcfg, const TrainConfig& tcfg);

/// Forward pass on already-preprocessed features; dropout disabled.
std::vector<SurvivalCurve> predict(const TrainedModel& model, const SurvivalDataset& data);

std::vector<HazardSequence> predict_hazards(const TrainedModel& model,
                                            const SurvivalDataset& data);

}  // namespace dcs
