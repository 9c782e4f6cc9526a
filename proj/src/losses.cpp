#include "dcs/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcs/grids.hpp"

namespace dcs {

namespace {

void check_curves(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
                  const TimeGrid& grid) {
  if (curves.size() != data.size())
    throw std::invalid_argument("loss: one curve per record required");
  for (const auto& c : curves) {
    if (!c.grid || c.values.size() != c.grid->size() || !same_grid(*c.grid, grid))
      throw std::invalid_argument("loss: curve grid does not match the loss grid");
  }
}

double curve_value_at(const SurvivalCurve& curve, double z, KernelInterpolation interp) {
  if (interp == KernelInterpolation::Linear) return interpolate_at(curve, z);
  return curve.values[discretize(z, *curve.grid)];
}

InterpCoeffs query_coeffs(const TimeGrid& grid, double z, KernelInterpolation interp) {
  if (interp == KernelInterpolation::Linear) return interp_coeffs(grid, z);
  InterpCoeffs c;
  c.lo = discretize(z, grid);
  c.w_lo = 1.0;
  return c;
}

}  // namespace

ComparisonMask build_mask(const SurvivalDataset& data, KernelPairs variant) {
  ComparisonMask mask;
  mask.variant = variant;
  const auto& recs = data.records;
  const std::size_t n = recs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!recs[i].event) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!(recs[i].time < recs[j].time)) continue;
      if (variant == KernelPairs::EventsOnly && !recs[j].event) continue;
      mask.pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }
  return mask;
}

PairCounts count_comparable_pairs(const SurvivalDataset& data) {
  std::vector<double> all;
  std::vector<double> events;
  all.reserve(data.size());
  for (const auto& r : data.records) {
    all.push_back(r.time);
    if (r.event) events.push_back(r.time);
  }
  std::sort(all.begin(), all.end());
  std::sort(events.begin(), events.end());

  PairCounts counts;
  for (double z : events) {
    counts.events_and_cens +=
        static_cast<std::uint64_t>(all.end() - std::upper_bound(all.begin(), all.end(), z));
    counts.events_only += static_cast<std::uint64_t>(
        events.end() - std::upper_bound(events.begin(), events.end(), z));
  }
  return counts;
}

double rps_loss(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
                const TimeGrid& grid) {
  check_curves(curves, data, grid);
  const std::size_t L = grid.size();
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& rec = data.records[i];
    const auto& s = curves[i].values;
    const std::size_t li = discretize(rec.time, grid);
    if (rec.event) {
      for (std::size_t l = 0; l < L; ++l) {
        const double target = l < li ? 1.0 : 0.0;
        const double d = s[l] - target;
        total += d * d;
      }
    } else {
      for (std::size_t l = 0; l <= li; ++l) {
        const double d = s[l] - 1.0;
        total += d * d;
      }
    }
  }
  return total;
}

double kernel_loss(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
                   const ComparisonMask& mask, double sigma, KernelInterpolation interp) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel_loss: sigma must be positive");
  if (curves.size() != data.size())
    throw std::invalid_argument("kernel_loss: one curve per record required");
  double total = 0.0;
  for (const auto& [i, j] : mask.pairs) {
    const double zi = data.records[i].time;
    const double si = curve_value_at(curves[i], zi, interp);
    const double sj = curve_value_at(curves[j], zi, interp);
    total += std::exp(-(sj - si) / sigma);
  }
  return total;
}

double combined_loss(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
                     const TimeGrid& grid, const LossConfig& cfg) {
  const double rps = rps_loss(curves, data, grid);
  const ComparisonMask mask = build_mask(data, cfg.kernel_pairs);
  const double kernel =
      mask.pairs.empty()
          ? 0.0
          : kernel_loss(curves, data, mask, cfg.sigma, cfg.kernel_interpolation);
  if (!cfg.normalized) return rps + cfg.lambda * kernel;
  const double n = static_cast<double>(data.size());
  const double L = static_cast<double>(grid.size());
  double total = rps / (n * L);
  if (!mask.pairs.empty())
    total += cfg.lambda / static_cast<double>(mask.pairs.size()) * kernel;
  return total;
}

double estimate_comparison_probability(double censoring_rate, KernelPairs variant) {
  if (!(censoring_rate >= 0.0 && censoring_rate < 1.0))
    throw std::invalid_argument("censoring rate must lie in [0,1)");
  const double u = 1.0 - censoring_rate;
  return variant == KernelPairs::EventsOnly ? u * u / 2.0 : u / 2.0;
}

ComparisonFactor comparison_factor(const SurvivalDataset& data) {
  const PairCounts counts = count_comparable_pairs(data);
  ComparisonFactor f;
  f.count_events_only = counts.events_only;
  f.count_events_and_cens = counts.events_and_cens;
  f.censoring_rate = data.censoring_rate();
  f.f_estimated = 1.0 / (1.0 - f.censoring_rate);
  if (counts.events_only > 0)
    f.f_observed = static_cast<double>(counts.events_and_cens) /
                   static_cast<double>(counts.events_only);
  return f;
}

nn::Var rps_loss_node(nn::Graph& g, nn::Var survival, const SurvivalDataset& batch,
                      const TimeGrid& grid) {
  const std::size_t n = batch.size();
  const std::size_t L = grid.size();
  if (g.value(survival).rows() != n || g.value(survival).cols() != L)
    throw std::invalid_argument("rps_loss_node: survival matrix must be [n, L]");
  nn::Tensor target(n, L);
  nn::Tensor weight(n, L);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = batch.records[i];
    const std::size_t li = discretize(rec.time, grid);
    if (rec.event) {
      for (std::size_t l = 0; l < L; ++l) {
        weight.at(i, l) = 1.0;
        target.at(i, l) = l < li ? 1.0 : 0.0;
      }
    } else {
      for (std::size_t l = 0; l <= li; ++l) {
        weight.at(i, l) = 1.0;
        target.at(i, l) = 1.0;
      }
    }
  }
  const nn::Var diff = g.sub(survival, g.constant(std::move(target)));
  return g.sum(g.mul(g.mul(diff, diff), g.constant(std::move(weight))));
}

nn::Var kernel_loss_node(nn::Graph& g, nn::Var survival, const SurvivalDataset& batch,
                         const TimeGrid& grid, const ComparisonMask& mask, double sigma,
                         KernelInterpolation interp) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel_loss_node: sigma must be positive");
  std::vector<nn::InterpQuery> earlier, later;
  earlier.reserve(mask.pairs.size());
  later.reserve(mask.pairs.size());
  for (const auto& [i, j] : mask.pairs) {
    const double zi = batch.records[i].time;
    const InterpCoeffs c = query_coeffs(grid, zi, interp);
    nn::InterpQuery q{i, c.lo, c.hi, c.w_lo, c.w_hi, c.offset};
    earlier.push_back(q);
    q.row = j;
    later.push_back(q);
  }
  const nn::Var si = g.gather_interp(survival, std::move(earlier));
  const nn::Var sj = g.gather_interp(survival, std::move(later));
  return g.sum(g.exp(g.scale(g.sub(sj, si), -1.0 / sigma)));
}

nn::Var combined_loss_node(nn::Graph& g, nn::Var survival, const SurvivalDataset& batch,
                           const TimeGrid& grid, const LossConfig& cfg) {
  const nn::Var rps = rps_loss_node(g, survival, batch, grid);
  const ComparisonMask mask = build_mask(batch, cfg.kernel_pairs);
  const bool with_kernel = !mask.pairs.empty() && cfg.lambda != 0.0;
  if (!cfg.normalized) {
    if (!with_kernel) return rps;
    const nn::Var kernel =
        kernel_loss_node(g, survival, batch, grid, mask, cfg.sigma, cfg.kernel_interpolation);
    return g.add(rps, g.scale(kernel, cfg.lambda));
  }
  const double n = static_cast<double>(batch.size());
  const double L = static_cast<double>(grid.size());
  const nn::Var rps_term = g.scale(rps, 1.0 / (n * L));
  if (!with_kernel) return rps_term;
  const nn::Var kernel =
      kernel_loss_node(g, survival, batch, grid, mask, cfg.sigma, cfg.kernel_interpolation);
  return g.add(rps_term, g.scale(kernel, cfg.lambda / static_cast<double>(mask.pairs.size())));
}

}  // namespace dcs
