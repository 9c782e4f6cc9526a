#pragma once

#include <json.hpp>

#include "dcs/data.hpp"
#include "dcs/grids.hpp"
#include "dcs/losses.hpp"
#include "dcs/model.hpp"

// JSON bindings for every configuration struct. Serialization is canonical:
// nlohmann orders object keys lexicographically and prints doubles with
// round-trip precision, so equal configs produce identical text.

namespace dcs {

void to_json(nlohmann::json& j, const GridSpec& s);
void from_json(const nlohmann::json& j, GridSpec& s);

void to_json(nlohmann::json& j, const LossConfig& c);
void from_json(const nlohmann::json& j, LossConfig& c);

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

void to_json(nlohmann::json& j, const DatasetSchema& s);
void from_json(const nlohmann::json& j, DatasetSchema& s);

void to_json(nlohmann::json& j, const PreprocessStats& s);
void from_json(const nlohmann::json& j, PreprocessStats& s);

std::string spacing_name(GridSpacing s);
GridSpacing spacing_from_name(const std::string& name);

/// FNV-1a over the canonical JSON dump, as a fixed-width hex string.
std::string config_hash(const nlohmann::json& j);

}  // namespace dcs
