#include "dcs/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace dcs {

std::size_t SurvivalDataset::num_features() const {
  return records.empty() ? feature_names.size() : records.front().features.size();
}

std::size_t SurvivalDataset::num_events() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.event ? 1 : 0;
  return n;
}

double SurvivalDataset::censoring_rate() const {
  if (records.empty()) return 0.0;
  return 1.0 - static_cast<double>(num_events()) / static_cast<double>(records.size());
}

void SurvivalDataset::validate() const {
  const std::size_t p = num_features();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!(r.time > 0.0) || !std::isfinite(r.time))
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": time must be positive and finite");
    if (r.features.size() != p)
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": inconsistent feature dimension");
    for (double x : r.features)
      if (!std::isfinite(x))
        throw std::invalid_argument("record " + std::to_string(i) +
                                    ": non-finite feature value");
  }
}

SurvivalCurve survival_from_hazards(const HazardSequence& h) {
  if (!h.grid || h.grid->size() != h.hazards.size())
    throw std::invalid_argument("hazard sequence does not match its grid");
  SurvivalCurve curve;
  curve.grid = h.grid;
  curve.values.resize(h.hazards.size());
  double s = 1.0;
  for (std::size_t l = 0; l < h.hazards.size(); ++l) {
    const double hl = h.hazards[l];
    if (!(hl >= 0.0 && hl <= 1.0))
      throw std::invalid_argument("hazard outside [0,1] at node " + std::to_string(l));
    s *= 1.0 - hl;
    curve.values[l] = s;
  }
  return curve;
}

KaplanMeierCurve kaplan_meier(const SurvivalDataset& data) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("kaplan_meier: empty dataset");

  // deaths per distinct uncensored event time
  std::map<double, std::size_t> deaths;
  for (const auto& r : data.records)
    if (r.event) ++deaths[r.time];

  std::vector<double> times;
  times.reserve(n);
  for (const auto& r : data.records) times.push_back(r.time);
  std::sort(times.begin(), times.end());

  KaplanMeierCurve km;
  double s = 1.0;
  for (const auto& [t, d] : deaths) {
    // at risk: everyone with observed time >= t
    const std::size_t at_risk =
        times.end() - std::lower_bound(times.begin(), times.end(), t);
    s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
    km.event_times.push_back(t);
    km.survival.push_back(s);
  }
  return km;
}

double km_value(const KaplanMeierCurve& km, double t) {
  auto it = std::upper_bound(km.event_times.begin(), km.event_times.end(), t);
  if (it == km.event_times.begin()) return 1.0;
  return km.survival[static_cast<std::size_t>(it - km.event_times.begin()) - 1];
}

InterpCoeffs interp_coeffs(const TimeGrid& grid, double t) {
  const auto& nodes = grid.nodes;
  InterpCoeffs c;
  if (nodes.empty()) throw std::invalid_argument("interp_coeffs: empty grid");
  if (t >= nodes.back()) {
    c.lo = nodes.size() - 1;
    c.w_lo = 1.0;
    return c;
  }
  if (t <= nodes.front()) {
    // line through the implicit anchor (0, 1) and (t_1, S_1)
    const double w = t / nodes.front();
    c.lo = 0;
    c.w_lo = w;
    c.offset = 1.0 - w;
    return c;
  }
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - nodes.begin()) - 1;
  const double w = (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
  c.lo = k;
  c.hi = k + 1;
  c.w_lo = 1.0 - w;
  c.w_hi = w;
  return c;
}

double interpolate_at(const SurvivalCurve& curve, double t) {
  const InterpCoeffs c = interp_coeffs(*curve.grid, t);
  double v = c.offset + c.w_lo * curve.values[c.lo];
  if (c.hi != InterpCoeffs::npos) v += c.w_hi * curve.values[c.hi];
  return v;
}

std::vector<double> interpolate_curve(const SurvivalCurve& curve,
                                      const std::vector<double>& eval_times) {
  std::vector<double> out;
  out.reserve(eval_times.size());
  for (double t : eval_times) out.push_back(interpolate_at(curve, t));
  return out;
}

bool same_grid(const TimeGrid& a, const TimeGrid& b) {
  return &a == &b || a.nodes == b.nodes;
}

}  // namespace dcs
