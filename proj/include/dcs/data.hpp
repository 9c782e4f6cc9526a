#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcs/core.hpp"

namespace dcs {

struct DatasetSchema {
  std::string time_column;
  std::string event_column;
  std::vector<std::string> categorical_columns;
  /// Continuous columns where a literal 0 means "not recorded".
  std::vector<std::string> zero_as_missing_columns;
};

/// Parsed CSV with missing cells as empty strings. Column order follows the
/// header row.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t size() const { return rows.size(); }
  std::optional<std::size_t> column_index(const std::string& name) const;
};

/// UTF-8, comma separated, header row required, empty cell = missing, no
/// quoting. Validates that times parse positive and events parse 0/1;
/// malformed rows are reported with their line number. The event column may
/// not be missing.
RawTable load_csv(const std::filesystem::path& path, const DatasetSchema& schema);

struct NumericColumnStats {
  std::string name;
  double mean = 0.0;
  double stddev = 1.0;  // population convention (1/n)
  double median = 0.0;  // imputation value
};

struct CategoricalColumnStats {
  std::string name;
  std::string mode;                     // imputation value
  std::vector<std::string> vocabulary;  // sorted training categories
};

struct PreprocessStats {
  std::string time_column;
  std::string event_column;
  std::vector<NumericColumnStats> numeric;
  std::vector<CategoricalColumnStats> categorical;
  std::vector<std::string> dropped_columns;  // constant numeric columns
  std::vector<std::string> zero_as_missing_columns;

  /// Output feature layout: numeric columns first (header order), then
  /// one-hot blocks per categorical column ("col=value", vocabulary order).
  std::vector<std::string> feature_names() const;
};

/// Fit imputation and standardization statistics on training data only.
PreprocessStats fit_preprocess(const RawTable& train, const DatasetSchema& schema);

/// Numeric: impute the training median, then standardize with training
/// moments. Categorical: impute the training mode, then one-hot against the
/// training vocabulary; unseen categories encode as all zeros with a warning
/// on stderr.
SurvivalDataset apply_preprocess(const RawTable& table, const PreprocessStats& stats);

enum class TimeDistribution { Uniform, WeibullClusters };

/// IndependentFlip: observed times keep their drawn value and the event flag
/// flips to censored with probability c, independently of time. This matches
/// the independence assumptions behind the closed-form comparison-count
/// estimates exactly.
/// CompetingLate: an exponential event process races a bounded-window
/// censoring process (rate solved so the expected censoring fraction is c).
/// Censorings concentrate late relative to events, so observed comparison
/// factors exceed 1/(1-c); the closed forms do not hold here.
enum class CensoringMode { IndependentFlip, CompetingLate };

struct SyntheticSpec {
  std::size_t n = 1000;
  double censoring_rate = 0.3;
  TimeDistribution distribution = TimeDistribution::Uniform;
  CensoringMode censoring = CensoringMode::IndependentFlip;
  std::uint64_t seed = 1;
  std::size_t noise_features = 2;
};

SurvivalDataset generate_synthetic(const SyntheticSpec& spec);

/// Two well-separated Weibull clusters. Feature 0 is the cluster indicator,
/// feature 1 a standard-normal severity whose time-scale effect stays below
/// coarse-grid resolution, and the remaining features are pure noise.
/// Censoring is an independent flag flip at the given rate.
SurvivalDataset generate_two_cluster(std::size_t n, double censoring_rate, std::uint64_t seed,
                                     std::size_t noise_features = 2);

/// Per-stratum split (events, then censored) with one shared RNG stream:
/// indices of each stratum are shuffled in place and the first
/// round(n_stratum * test_fraction) go to the test set. Record order within
/// each output follows the original dataset.
std::pair<SurvivalDataset, SurvivalDataset> stratified_split(const SurvivalDataset& data,
                                                             double test_fraction,
                                                             std::uint64_t seed);

/// Writes feature columns, then time and event, with round-trip precision.
void write_csv(const std::filesystem::path& path, const SurvivalDataset& data);

}  // namespace dcs
