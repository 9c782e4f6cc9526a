#include "dcs/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dcs/random.hpp"

namespace dcs {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::optional<std::size_t> RawTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

RawTable load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  RawTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.columns = split_line(line);
  if (table.columns.empty()) throw std::runtime_error(path.string() + ": empty header row");

  const auto time_idx = [&]() {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      if (table.columns[i] == schema.time_column) return i;
    throw std::runtime_error(path.string() + ": missing time column '" + schema.time_column +
                             "'");
  }();
  const auto event_idx = [&]() {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      if (table.columns[i] == schema.event_column) return i;
    throw std::runtime_error(path.string() + ": missing event column '" + schema.event_column +
                             "'");
  }();

  std::set<std::size_t> zero_missing;
  for (const auto& name : schema.zero_as_missing_columns)
    if (auto idx = table.column_index(name)) zero_missing.insert(*idx);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != table.columns.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(table.columns.size()) +
                               " cells, got " + std::to_string(cells.size()));
    const auto t = parse_double(cells[time_idx]);
    if (!t || !(*t > 0.0) || !std::isfinite(*t))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": time must be a positive number");
    if (cells[event_idx] != "0" && cells[event_idx] != "1")
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": event must be 0 or 1 and may not be missing");
    for (std::size_t idx : zero_missing) {
      const auto v = parse_double(cells[idx]);
      if (v && *v == 0.0) cells[idx].clear();
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::vector<std::string> PreprocessStats::feature_names() const {
  std::vector<std::string> names;
  for (const auto& c : numeric) names.push_back(c.name);
  for (const auto& c : categorical)
    for (const auto& v : c.vocabulary) names.push_back(c.name + "=" + v);
  return names;
}

PreprocessStats fit_preprocess(const RawTable& train, const DatasetSchema& schema) {
  if (train.rows.empty()) throw std::invalid_argument("fit_preprocess: empty table");
  PreprocessStats stats;
  stats.time_column = schema.time_column;
  stats.event_column = schema.event_column;
  stats.zero_as_missing_columns = schema.zero_as_missing_columns;

  const std::set<std::string> categorical(schema.categorical_columns.begin(),
                                          schema.categorical_columns.end());

  for (std::size_t c = 0; c < train.columns.size(); ++c) {
    const std::string& name = train.columns[c];
    if (name == schema.time_column || name == schema.event_column) continue;

    if (categorical.count(name)) {
      std::map<std::string, std::size_t> freq;
      for (const auto& row : train.rows)
        if (!row[c].empty()) ++freq[row[c]];
      if (freq.empty())
        throw std::invalid_argument("fit_preprocess: categorical column '" + name +
                                    "' is entirely missing");
      CategoricalColumnStats cs;
      cs.name = name;
      std::size_t best = 0;
      for (const auto& [value, count] : freq) {
        cs.vocabulary.push_back(value);
        if (count > best) {  // ties resolve to the lexicographically smallest
          best = count;
          cs.mode = value;
        }
      }
      stats.categorical.push_back(std::move(cs));
      continue;
    }

    std::vector<double> values;
    values.reserve(train.rows.size());
    for (std::size_t r = 0; r < train.rows.size(); ++r) {
      const auto& cell = train.rows[r][c];
      if (cell.empty()) continue;
      const auto v = parse_double(cell);
      if (!v)
        throw std::invalid_argument("fit_preprocess: column '" + name + "' row " +
                                    std::to_string(r + 2) + ": not a number: '" + cell + "'");
      values.push_back(*v);
    }
    if (values.empty())
      throw std::invalid_argument("fit_preprocess: numeric column '" + name +
                                  "' is entirely missing");

    NumericColumnStats ns;
    ns.name = name;
    ns.median = median_of(values);

    // impute before computing moments so apply() sees the same distribution
    double mean = 0.0;
    const double n = static_cast<double>(train.rows.size());
    for (const auto& row : train.rows) {
      const auto v = parse_double(row[c]);
      mean += v ? *v : ns.median;
    }
    mean /= n;
    double var = 0.0;
    for (const auto& row : train.rows) {
      const auto v = parse_double(row[c]);
      const double x = (v ? *v : ns.median) - mean;
      var += x * x;
    }
    var /= n;
    ns.mean = mean;
    ns.stddev = std::sqrt(var);
    if (ns.stddev == 0.0) {
      std::cerr << "warning: dropping constant column '" << name << "'\n";
      stats.dropped_columns.push_back(name);
      continue;
    }
    stats.numeric.push_back(std::move(ns));
  }
  return stats;
}

SurvivalDataset apply_preprocess(const RawTable& table, const PreprocessStats& stats) {
  const auto col_or_throw = [&](const std::string& name) {
    const auto idx = table.column_index(name);
    if (!idx) throw std::invalid_argument("apply_preprocess: missing column '" + name + "'");
    return *idx;
  };
  const std::size_t time_idx = col_or_throw(stats.time_column);
  const std::size_t event_idx = col_or_throw(stats.event_column);
  std::vector<std::size_t> numeric_idx, categorical_idx;
  for (const auto& c : stats.numeric) numeric_idx.push_back(col_or_throw(c.name));
  for (const auto& c : stats.categorical) categorical_idx.push_back(col_or_throw(c.name));

  SurvivalDataset data;
  data.feature_names = stats.feature_names();
  std::size_t unseen = 0;
  for (const auto& row : table.rows) {
    SurvivalRecord rec;
    const auto t = parse_double(row[time_idx]);
    if (!t) throw std::invalid_argument("apply_preprocess: unparsable time cell");
    rec.time = *t;
    rec.event = row[event_idx] == "1";
    rec.features.reserve(data.feature_names.size());
    for (std::size_t k = 0; k < stats.numeric.size(); ++k) {
      const auto& ns = stats.numeric[k];
      const auto v = parse_double(row[numeric_idx[k]]);
      const double x = v ? *v : ns.median;
      rec.features.push_back((x - ns.mean) / ns.stddev);
    }
    for (std::size_t k = 0; k < stats.categorical.size(); ++k) {
      const auto& cs = stats.categorical[k];
      std::string value = row[categorical_idx[k]];
      if (value.empty()) value = cs.mode;
      bool found = false;
      for (const auto& vocab : cs.vocabulary) {
        const bool hit = vocab == value;
        rec.features.push_back(hit ? 1.0 : 0.0);
        found = found || hit;
      }
      if (!found) ++unseen;
    }
    data.records.push_back(std::move(rec));
  }
  if (unseen > 0)
    std::cerr << "warning: " << unseen
              << " categorical value(s) unseen in training encode as all zeros\n";
  data.validate();
  return data;
}

namespace {

// Censoring fraction of the competing design: event ~ Exp(rate), censor ~
// U(0,1), censored iff the censoring draw is strictly smaller. P(censored) =
// integral_0^1 exp(-rate*u) du = (1 - exp(-rate))/rate, decreasing in rate.
double competing_censor_fraction(double rate) {
  return (1.0 - std::exp(-rate)) / rate;
}

double solve_competing_rate(double target_censoring) {
  double lo = 1e-9, hi = 1e3;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (competing_censor_fraction(mid) > target_censoring)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SurvivalDataset generate_synthetic(const SyntheticSpec& spec) {
  if (!(spec.censoring_rate >= 0.0 && spec.censoring_rate < 1.0))
    throw std::invalid_argument("generate_synthetic: censoring rate must lie in [0,1)");
  if (spec.distribution == TimeDistribution::WeibullClusters &&
      spec.censoring == CensoringMode::CompetingLate)
    throw std::invalid_argument(
        "generate_synthetic: competing censoring is only defined for uniform times");

  std::mt19937_64 rng(spec.seed);
  SurvivalDataset data;

  if (spec.distribution == TimeDistribution::WeibullClusters) {
    data.feature_names.push_back("cluster");
    data.feature_names.push_back("severity");
    for (std::size_t k = 0; k < spec.noise_features; ++k)
      data.feature_names.push_back("noise" + std::to_string(k));
    // Draw order per record: cluster flag, severity, noise features, event
    // time, censoring flag. The severity covariate shifts the Weibull scale
    // by +-15% per standard deviation, well below the spacing of a coarse
    // grid, so ordering individuals inside one time bucket requires it.
    for (std::size_t i = 0; i < spec.n; ++i) {
      SurvivalRecord rec;
      const bool late_cluster = uniform_unit(rng) < 0.5;
      const double severity = normal_sample(rng);
      rec.features.push_back(late_cluster ? 1.0 : 0.0);
      rec.features.push_back(severity);
      for (std::size_t k = 0; k < spec.noise_features; ++k)
        rec.features.push_back(normal_sample(rng));
      rec.time =
          weibull_sample(rng, 2.0, (late_cluster ? 32.0 : 4.0) * std::exp(0.15 * severity));
      rec.event = !(uniform_unit(rng) < spec.censoring_rate);
      data.records.push_back(std::move(rec));
    }
    return data;
  }

  for (std::size_t k = 0; k < spec.noise_features; ++k)
    data.feature_names.push_back("noise" + std::to_string(k));

  if (spec.censoring == CensoringMode::IndependentFlip) {
    // Draw order per record: noise features, time, censoring flag.
    for (std::size_t i = 0; i < spec.n; ++i) {
      SurvivalRecord rec;
      for (std::size_t k = 0; k < spec.noise_features; ++k)
        rec.features.push_back(normal_sample(rng));
      rec.time = 100.0 * uniform_open(rng);
      rec.event = !(uniform_unit(rng) < spec.censoring_rate);
      data.records.push_back(std::move(rec));
    }
    return data;
  }

  // CompetingLate. Event times Exp(rate) race uniform censoring times on
  // (0,1); the scale blows the observation window up to ~(0,100].
  const double rate = solve_competing_rate(spec.censoring_rate);
  for (std::size_t i = 0; i < spec.n; ++i) {
    SurvivalRecord rec;
    for (std::size_t k = 0; k < spec.noise_features; ++k)
      rec.features.push_back(normal_sample(rng));
    const double event_time = exponential_sample(rng, rate);
    const double censor_time = uniform_open(rng);
    rec.event = event_time <= censor_time;
    rec.time = 100.0 * std::min(event_time, censor_time);
    data.records.push_back(std::move(rec));
  }
  return data;
}

SurvivalDataset generate_two_cluster(std::size_t n, double censoring_rate, std::uint64_t seed,
                                     std::size_t noise_features) {
  SyntheticSpec spec;
  spec.n = n;
  spec.censoring_rate = censoring_rate;
  spec.distribution = TimeDistribution::WeibullClusters;
  spec.censoring = CensoringMode::IndependentFlip;
  spec.seed = seed;
  spec.noise_features = noise_features;
  return generate_synthetic(spec);
}

std::pair<SurvivalDataset, SurvivalDataset> stratified_split(const SurvivalDataset& data,
                                                             double test_fraction,
                                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("stratified_split: test fraction must lie in (0,1)");

  std::vector<std::size_t> events, censored;
  for (std::size_t i = 0; i < data.size(); ++i)
    (data.records[i].event ? events : censored).push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<bool> in_test(data.size(), false);
  std::size_t n_test = 0;
  // Events are shuffled and drawn first, then censored, on one engine.
  for (auto* stratum : {&events, &censored}) {
    if (stratum->empty()) continue;
    shuffle_inplace(*stratum, rng);
    const auto take = static_cast<std::size_t>(
        std::llround(static_cast<double>(stratum->size()) * test_fraction));
    for (std::size_t k = 0; k < take; ++k) in_test[(*stratum)[k]] = true;
    n_test += take;
  }
  if (n_test == 0 || n_test == data.size())
    throw std::invalid_argument("stratified_split: too few records to stratify");

  SurvivalDataset train, test;
  train.feature_names = data.feature_names;
  test.feature_names = data.feature_names;
  for (std::size_t i = 0; i < data.size(); ++i)
    (in_test[i] ? test : train).records.push_back(data.records[i]);
  return {std::move(train), std::move(test)};
}

void write_csv(const std::filesystem::path& path, const SurvivalDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& name : data.feature_names) out << name << ',';
  out << "time,event\n";
  for (const auto& rec : data.records) {
    for (double f : rec.features) out << format_double(f) << ',';
    out << format_double(rec.time) << ',' << (rec.event ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace dcs
