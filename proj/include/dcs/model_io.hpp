#pragma once

#include <filesystem>

#include "dcs/layers.hpp"
#include "dcs/model.hpp"

namespace dcs {

/// Flat binary parameter file, little-endian:
///   magic "DCSPARAM", u32 version (= 1), u32 parameter count, then per
///   parameter: u32 name length, name bytes, u32 rank (= 2), u64 dims,
///   raw IEEE-754 doubles in row-major order.
/// Round-trips bit-exactly. Saving rejects non-finite values.
void save_parameters(const std::filesystem::path& path, const nn::ParameterSet& params);
nn::ParameterSet load_parameters(const std::filesystem::path& path);

/// Checkpoint = parameter file + JSON manifest (architecture, grid nodes,
/// feature names, preprocessing statistics, config hash).
void save_model(const std::filesystem::path& checkpoint_path,
                const std::filesystem::path& manifest_path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& checkpoint_path,
                        const std::filesystem::path& manifest_path);

}  // namespace dcs
