#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dcs/core.hpp"

namespace dcs {

/// Grid construction parameters. t_max defaults to the maximum observed time
/// of the construction dataset; t_min (logarithmic spacing only) defaults to
/// the smallest positive observed time, floored at 1.0 time unit when the
/// window allows it.
struct GridSpec {
  GridSpacing spacing = GridSpacing::Linear;
  std::size_t num_nodes = 2;
  std::optional<double> t_max;
  std::optional<double> t_min;
};

/// Linear:      t_l = l * T_max / L
/// Logarithmic: t_l = t_min * (T_max / t_min)^(l/L)
/// Quantile:    nearest-rank empirical quantiles of the pooled observed times
///              (events and censorings); tied quantile values are collapsed,
///              so the result may have fewer than L nodes.
TimeGrid build_grid(const GridSpec& spec, const SurvivalDataset& data);

/// Zero-based index of the smallest node with t_l >= z; times beyond the last
/// node map to the last node.
std::size_t discretize(double z, const TimeGrid& grid);

struct NodeCounts {
  std::size_t events = 0;
  std::size_t censorings = 0;
};

std::vector<NodeCounts> event_histogram(const SurvivalDataset& data, const TimeGrid& grid);

}  // namespace dcs
