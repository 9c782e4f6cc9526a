#include "dcs/config_json.hpp"

#include <cstdio>
#include <stdexcept>

namespace dcs {

namespace {

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

template <typename T>
void get_optional(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

std::string spacing_name(GridSpacing s) {
  switch (s) {
    case GridSpacing::Linear: return "linear";
    case GridSpacing::Logarithmic: return "logarithmic";
    case GridSpacing::Quantile: return "quantile";
  }
  throw std::invalid_argument("unknown grid spacing");
}

GridSpacing spacing_from_name(const std::string& name) {
  if (name == "linear") return GridSpacing::Linear;
  if (name == "logarithmic") return GridSpacing::Logarithmic;
  if (name == "quantile") return GridSpacing::Quantile;
  throw std::invalid_argument("unknown grid spacing '" + name +
                              "' (expected linear, logarithmic or quantile)");
}

void to_json(nlohmann::json& j, const GridSpec& s) {
  j = nlohmann::json{{"spacing", spacing_name(s.spacing)}, {"num_nodes", s.num_nodes}};
  j["t_max"] = s.t_max ? nlohmann::json(*s.t_max) : nlohmann::json(nullptr);
  j["t_min"] = s.t_min ? nlohmann::json(*s.t_min) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, GridSpec& s) {
  s.spacing = spacing_from_name(j.at("spacing").get<std::string>());
  j.at("num_nodes").get_to(s.num_nodes);
  get_optional(j, "t_max", s.t_max);
  get_optional(j, "t_min", s.t_min);
}

void to_json(nlohmann::json& j, const LossConfig& c) {
  j = nlohmann::json{
      {"lambda", c.lambda},
      {"sigma", c.sigma},
      {"kernel_pairs",
       c.kernel_pairs == KernelPairs::EventsOnly ? "events_only" : "events_and_censored"},
      {"normalized", c.normalized},
      {"kernel_interpolation",
       c.kernel_interpolation == KernelInterpolation::Linear ? "linear" : "nearest_node"}};
}

void from_json(const nlohmann::json& j, LossConfig& c) {
  get_if_present(j, "lambda", c.lambda);
  get_if_present(j, "sigma", c.sigma);
  if (j.contains("kernel_pairs")) {
    const auto name = j.at("kernel_pairs").get<std::string>();
    if (name == "events_only")
      c.kernel_pairs = KernelPairs::EventsOnly;
    else if (name == "events_and_censored")
      c.kernel_pairs = KernelPairs::EventsAndCensored;
    else
      throw std::invalid_argument("unknown kernel_pairs '" + name + "'");
  }
  get_if_present(j, "normalized", c.normalized);
  if (j.contains("kernel_interpolation")) {
    const auto name = j.at("kernel_interpolation").get<std::string>();
    if (name == "linear")
      c.kernel_interpolation = KernelInterpolation::Linear;
    else if (name == "nearest_node")
      c.kernel_interpolation = KernelInterpolation::NearestNode;
    else
      throw std::invalid_argument("unknown kernel_interpolation '" + name + "'");
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"encoder_layers", c.encoder_layers},
                     {"decoder_layers", c.decoder_layers},
                     {"bidirectional", c.bidirectional},
                     {"lstm_skip", c.lstm_skip},
                     {"aggregation_layers", c.aggregation_layers},
                     {"grid", c.grid},
                     {"loss", c.loss},
                     {"dropout_rate", c.dropout_rate},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  get_if_present(j, "encoder_layers", c.encoder_layers);
  get_if_present(j, "decoder_layers", c.decoder_layers);
  get_if_present(j, "bidirectional", c.bidirectional);
  get_if_present(j, "lstm_skip", c.lstm_skip);
  get_if_present(j, "aggregation_layers", c.aggregation_layers);
  get_if_present(j, "grid", c.grid);
  get_if_present(j, "loss", c.loss);
  get_if_present(j, "dropout_rate", c.dropout_rate);
  get_if_present(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},
                     {"max_epochs", c.max_epochs},
                     {"early_stop_patience", c.early_stop_patience},
                     {"validation_fraction", c.validation_fraction},
                     {"learning_rate", c.learning_rate}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  get_if_present(j, "batch_size", c.batch_size);
  get_if_present(j, "max_epochs", c.max_epochs);
  get_if_present(j, "early_stop_patience", c.early_stop_patience);
  get_if_present(j, "validation_fraction", c.validation_fraction);
  get_if_present(j, "learning_rate", c.learning_rate);
}

void to_json(nlohmann::json& j, const DatasetSchema& s) {
  j = nlohmann::json{{"time_column", s.time_column},
                     {"event_column", s.event_column},
                     {"categorical_columns", s.categorical_columns},
                     {"zero_as_missing_columns", s.zero_as_missing_columns}};
}

void from_json(const nlohmann::json& j, DatasetSchema& s) {
  j.at("time_column").get_to(s.time_column);
  j.at("event_column").get_to(s.event_column);
  get_if_present(j, "categorical_columns", s.categorical_columns);
  get_if_present(j, "zero_as_missing_columns", s.zero_as_missing_columns);
}

void to_json(nlohmann::json& j, const PreprocessStats& s) {
  nlohmann::json numeric = nlohmann::json::array();
  for (const auto& c : s.numeric)
    numeric.push_back(nlohmann::json{
        {"name", c.name}, {"mean", c.mean}, {"stddev", c.stddev}, {"median", c.median}});
  nlohmann::json categorical = nlohmann::json::array();
  for (const auto& c : s.categorical)
    categorical.push_back(
        nlohmann::json{{"name", c.name}, {"mode", c.mode}, {"vocabulary", c.vocabulary}});
  j = nlohmann::json{{"time_column", s.time_column},
                     {"event_column", s.event_column},
                     {"numeric", numeric},
                     {"categorical", categorical},
                     {"dropped_columns", s.dropped_columns},
                     {"zero_as_missing_columns", s.zero_as_missing_columns}};
}

void from_json(const nlohmann::json& j, PreprocessStats& s) {
  j.at("time_column").get_to(s.time_column);
  j.at("event_column").get_to(s.event_column);
  s.numeric.clear();
  for (const auto& c : j.at("numeric")) {
    NumericColumnStats ns;
    c.at("name").get_to(ns.name);
    c.at("mean").get_to(ns.mean);
    c.at("stddev").get_to(ns.stddev);
    c.at("median").get_to(ns.median);
    s.numeric.push_back(std::move(ns));
  }
  s.categorical.clear();
  for (const auto& c : j.at("categorical")) {
    CategoricalColumnStats cs;
    c.at("name").get_to(cs.name);
    c.at("mode").get_to(cs.mode);
    c.at("vocabulary").get_to(cs.vocabulary);
    s.categorical.push_back(std::move(cs));
  }
  get_if_present(j, "dropped_columns", s.dropped_columns);
  get_if_present(j, "zero_as_missing_columns", s.zero_as_missing_columns);
}

std::string config_hash(const nlohmann::json& j) {
  const std::string text = j.dump();
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace dcs
