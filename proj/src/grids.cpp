#include "dcs/grids.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcs {

namespace {

std::vector<double> observed_times(const SurvivalDataset& data) {
  std::vector<double> z;
  z.reserve(data.size());
  for (const auto& r : data.records) z.push_back(r.time);
  return z;
}

}  // namespace

TimeGrid build_grid(const GridSpec& spec, const SurvivalDataset& data) {
  if (spec.num_nodes < 2) throw std::invalid_argument("build_grid: need at least 2 nodes");
  const std::size_t L = spec.num_nodes;

  TimeGrid grid;
  grid.spacing = spec.spacing;

  if (spec.spacing == GridSpacing::Quantile) {
    std::vector<double> z = observed_times(data);
    if (z.empty()) throw std::invalid_argument("build_grid: quantile spacing needs data");
    std::sort(z.begin(), z.end());
    const std::size_t n = z.size();
    grid.nodes.reserve(L);
    for (std::size_t l = 1; l <= L; ++l) {
      // nearest-rank quantile at level l/L: rank = ceil(n*l/L), 1-based
      const std::size_t rank = (n * l + L - 1) / L;
      const double q = z[rank - 1];
      if (grid.nodes.empty() || q > grid.nodes.back()) grid.nodes.push_back(q);
    }
    if (grid.nodes.size() < 2)
      throw std::invalid_argument("build_grid: quantile grid collapsed to fewer than 2 nodes");
    return grid;
  }

  double t_max = 0.0;
  if (spec.t_max) {
    t_max = *spec.t_max;
  } else {
    if (data.records.empty())
      throw std::invalid_argument("build_grid: t_max unset and no data to derive it from");
    for (const auto& r : data.records) t_max = std::max(t_max, r.time);
  }
  if (!(t_max > 0.0)) throw std::invalid_argument("build_grid: t_max must be positive");

  grid.nodes.resize(L);
  if (spec.spacing == GridSpacing::Linear) {
    for (std::size_t l = 1; l < L; ++l)
      grid.nodes[l - 1] = static_cast<double>(l) * t_max / static_cast<double>(L);
  } else {
    double t_min = 0.0;
    if (spec.t_min) {
      t_min = *spec.t_min;
    } else {
      t_min = t_max;
      for (const auto& r : data.records)
        if (r.time > 0.0) t_min = std::min(t_min, r.time);
      if (t_min < 1.0 && 1.0 < t_max) t_min = 1.0;
    }
    if (!(t_min > 0.0 && t_min < t_max))
      throw std::invalid_argument("build_grid: need 0 < t_min < t_max for logarithmic spacing");
    const double ratio = t_max / t_min;
    for (std::size_t l = 1; l < L; ++l)
      grid.nodes[l - 1] =
          t_min * std::pow(ratio, static_cast<double>(l) / static_cast<double>(L));
  }
  grid.nodes[L - 1] = t_max;  // exact endpoint
  for (std::size_t l = 1; l < L; ++l)
    if (!(grid.nodes[l] > grid.nodes[l - 1]))
      throw std::invalid_argument("build_grid: nodes not strictly increasing");
  return grid;
}

std::size_t discretize(double z, const TimeGrid& grid) {
  if (!(z > 0.0)) throw std::invalid_argument("discretize: time must be positive");
  const auto& nodes = grid.nodes;
  auto it = std::lower_bound(nodes.begin(), nodes.end(), z);
  if (it == nodes.end()) return nodes.size() - 1;
  return static_cast<std::size_t>(it - nodes.begin());
}

std::vector<NodeCounts> event_histogram(const SurvivalDataset& data, const TimeGrid& grid) {
  std::vector<NodeCounts> counts(grid.size());
  for (const auto& r : data.records) {
    NodeCounts& c = counts[discretize(r.time, grid)];
    if (r.event)
      ++c.events;
    else
      ++c.censorings;
  }
  return counts;
}

}  // namespace dcs
