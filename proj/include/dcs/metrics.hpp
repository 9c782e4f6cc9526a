#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcs/core.hpp"
#include "dcs/model.hpp"

namespace dcs {

/// Time-dependent concordance over every pair with z_i < z_j and d_i = 1
/// (event-to-event and event-to-censoring): credit 1 when
/// S(z_i|x_i) < S(z_i|x_j), 0.5 on exact ties, curves read by linear
/// interpolation. Throws when no comparable pair exists.
double cindex_td(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data);

struct CdaucOptions {
  /// Integration window; defaults to the smallest uncensored event time and
  /// the largest uncensored event time whose KM value is still positive.
  std::optional<double> tau1;
  std::optional<double> tau2;
};

/// AUC(t) at each distinct uncensored event time in (tau1, tau2], weighted by
/// the KM increment over that window. Cases at t: z_i <= t with d_i = 1;
/// controls: z_j > t; same tie convention as cindex_td.
double cdauc(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
             const CdaucOptions& opts = {});

/// KL divergence (natural log) between the binned distribution of S(z_i|x_i)
/// over uncensored individuals and the uniform distribution on num_bins
/// equal-width bins of [0,1]. Zero-frequency bins contribute nothing.
double ddc(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
           std::size_t num_bins = 10);

struct MetricSummary {
  double point = 0.0;      // full-sample value
  double boot_mean = 0.0;  // over usable resamples
  double boot_std = 0.0;   // sample standard deviation (n-1)
  std::size_t excluded_folds = 0;
};

struct EvaluationReport {
  MetricSummary cindex;
  MetricSummary cdauc;
  MetricSummary ddc;
  std::uint64_t n_comparable_pairs = 0;
  std::size_t n_censored_excluded_from_ddc = 0;
  std::size_t folds = 0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

struct BootstrapOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  CdaucOptions cdauc;
  std::size_t ddc_bins = 10;
};

/// Resamples the evaluation set with replacement (fold f draws its n record
/// indices as uniform_index calls f*n..(f+1)*n-1 on mt19937_64(seed)) and
/// summarizes each metric as mean and sample standard deviation. Resamples
/// where a metric is undefined are excluded from that metric and counted.
EvaluationReport bootstrap_evaluate(const std::vector<SurvivalCurve>& curves,
                                    const SurvivalDataset& data, const BootstrapOptions& opts);

EvaluationReport bootstrap_evaluate(const TrainedModel& model, const SurvivalDataset& test,
                                    const BootstrapOptions& opts);

}  // namespace dcs
