#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace dcs {

enum class GridSpacing { Linear, Logarithmic, Quantile };

/// Ordered discrete prediction times t_1 < ... < t_L.
struct TimeGrid {
  std::vector<double> nodes;
  GridSpacing spacing = GridSpacing::Linear;

  std::size_t size() const { return nodes.size(); }
  double t_max() const { return nodes.back(); }
};

using TimeGridPtr = std::shared_ptr<const TimeGrid>;

/// One individual: observed time z (event time or censoring time,
/// whichever came first) and the event indicator d.
struct SurvivalRecord {
  std::vector<double> features;
  double time = 0.0;
  bool event = false;
};

struct SurvivalDataset {
  std::vector<SurvivalRecord> records;
  std::vector<std::string> feature_names;

  std::size_t size() const { return records.size(); }
  std::size_t num_features() const;
  std::size_t num_events() const;
  double censoring_rate() const;

  /// Throws std::invalid_argument if any record has a non-positive or
  /// non-finite time, or feature dimensions disagree.
  void validate() const;
};

/// Per-node conditional event probabilities h_l, each in [0,1].
struct HazardSequence {
  TimeGridPtr grid;
  std::vector<double> hazards;
};

/// Monotone non-increasing survival probabilities on a grid.
struct SurvivalCurve {
  TimeGridPtr grid;
  std::vector<double> values;
};

/// Right-continuous step function: survival[k] is the value at and after
/// event_times[k], up to the next event time. Value before the first
/// event time is 1.
struct KaplanMeierCurve {
  std::vector<double> event_times;
  std::vector<double> survival;
};

/// S(t_l) = prod_{j<=l} (1 - h_j). Throws if any hazard is outside [0,1].
SurvivalCurve survival_from_hazards(const HazardSequence& h);

/// Product-limit estimate over the distinct uncensored event times.
/// Ties are processed simultaneously; censored individuals at time t are
/// still at risk for events at t. Throws on an empty dataset.
KaplanMeierCurve kaplan_meier(const SurvivalDataset& data);

double km_value(const KaplanMeierCurve& km, double t);

/// Coefficients of the piecewise-linear curve evaluation at time t:
///   value = offset + w_lo * values[lo] + w_hi * values[hi]
/// hi == npos when a single node suffices. The segment before t_1 is
/// anchored at the implicit point (0, 1); beyond t_L the value clamps to
/// the last node.
struct InterpCoeffs {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t lo = 0;
  std::size_t hi = npos;
  double w_lo = 0.0;
  double w_hi = 0.0;
  double offset = 0.0;
};

InterpCoeffs interp_coeffs(const TimeGrid& grid, double t);

double interpolate_at(const SurvivalCurve& curve, double t);

std::vector<double> interpolate_curve(const SurvivalCurve& curve,
                                      const std::vector<double>& eval_times);

bool same_grid(const TimeGrid& a, const TimeGrid& b);

}  // namespace dcs
