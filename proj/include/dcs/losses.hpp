#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dcs/autodiff.hpp"
#include "dcs/core.hpp"

namespace dcs {

/// Which comparable pairs the kernel loss sums over:
///   EventsOnly        - both individuals uncensored (matrix A)
///   EventsAndCensored - earlier individual uncensored, later one anything
///                       (matrix B; adds event-to-censoring pairs)
enum class KernelPairs { EventsOnly, EventsAndCensored };

/// How S(z_i | x) is read off a discrete curve inside the kernel loss.
enum class KernelInterpolation { Linear, NearestNode };

/// Ordered index pairs (i, j) with d_i = 1 and z_i < z_j (ties excluded);
/// EventsOnly additionally requires d_j = 1.
struct ComparisonMask {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  KernelPairs variant = KernelPairs::EventsAndCensored;
};

struct LossConfig {
  double lambda = 1.0;
  double sigma = 1.0;
  KernelPairs kernel_pairs = KernelPairs::EventsAndCensored;
  /// true: (1/nL) RPS + (lambda/n_comp) kernel; false: RPS + lambda * kernel.
  bool normalized = true;
  KernelInterpolation kernel_interpolation = KernelInterpolation::Linear;
};

/// Exhaustive O(n^2) pair enumeration.
ComparisonMask build_mask(const SurvivalDataset& data, KernelPairs variant);

/// |A| and |B| by sorting instead of enumeration; cross-checked against
/// build_mask in the test suite.
struct PairCounts {
  std::uint64_t events_only = 0;      // |A|
  std::uint64_t events_and_cens = 0;  // |B|
};
PairCounts count_comparable_pairs(const SurvivalDataset& data);

/// Raw (unnormalized) rank probability score: uncensored individuals score
/// the whole curve against a unit step dropping at their event node, censored
/// ones score the prefix up to their censoring node against one.
double rps_loss(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
                const TimeGrid& grid);

/// Raw exponential ranking penalty summed over the mask.
double kernel_loss(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
                   const ComparisonMask& mask, double sigma,
                   KernelInterpolation interp = KernelInterpolation::Linear);

double combined_loss(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
                     const TimeGrid& grid, const LossConfig& cfg);

/// Chance that a random ordered pair is comparable under the given mask,
/// assuming times iid and censoring flags independent of times:
/// (1-c)^2/2 for EventsOnly, (1-c)/2 for EventsAndCensored.
double estimate_comparison_probability(double censoring_rate, KernelPairs variant);

struct ComparisonFactor {
  std::uint64_t count_events_only = 0;      // |A|
  std::uint64_t count_events_and_cens = 0;  // |B|
  std::optional<double> f_observed;         // |B|/|A|, absent when |A| = 0
  double f_estimated = 1.0;                 // 1/(1-c)
  double censoring_rate = 0.0;
};
ComparisonFactor comparison_factor(const SurvivalDataset& data);

/// Graph-building variants used for training; the plain functions above are
/// the finite-difference oracle for these.
nn::Var rps_loss_node(nn::Graph& g, nn::Var survival, const SurvivalDataset& batch,
                      const TimeGrid& grid);
nn::Var kernel_loss_node(nn::Graph& g, nn::Var survival, const SurvivalDataset& batch,
                         const TimeGrid& grid, const ComparisonMask& mask, double sigma,
                         KernelInterpolation interp);
nn::Var combined_loss_node(nn::Graph& g, nn::Var survival, const SurvivalDataset& batch,
                           const TimeGrid& grid, const LossConfig& cfg);

}  // namespace dcs
