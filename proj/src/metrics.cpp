#include "dcs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "dcs/random.hpp"

namespace dcs {

namespace {

void check_inputs(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data) {
  if (curves.size() != data.size())
    throw std::invalid_argument("metrics: one curve per record required");
}

}  // namespace

double cindex_td(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data) {
  check_inputs(curves, data);
  const std::size_t n = data.size();
  double credit = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!data.records[i].event) continue;
    const double zi = data.records[i].time;
    const double si = interpolate_at(curves[i], zi);
    for (std::size_t j = 0; j < n; ++j) {
      if (!(zi < data.records[j].time)) continue;
      const double sj = interpolate_at(curves[j], zi);
      ++pairs;
      if (si < sj)
        credit += 1.0;
      else if (si == sj)
        credit += 0.5;
    }
  }
  if (pairs == 0) throw std::invalid_argument("cindex_td: no comparable pairs");
  return credit / static_cast<double>(pairs);
}

double cdauc(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
             const CdaucOptions& opts) {
  check_inputs(curves, data);
  const KaplanMeierCurve km = kaplan_meier(data);

  std::set<double> event_times_set;
  for (const auto& r : data.records)
    if (r.event) event_times_set.insert(r.time);
  if (event_times_set.empty()) throw std::invalid_argument("cdauc: no uncensored events");
  const std::vector<double> event_times(event_times_set.begin(), event_times_set.end());

  double tau1, tau2;
  if (opts.tau1) {
    tau1 = *opts.tau1;
  } else {
    tau1 = event_times.front();
  }
  if (opts.tau2) {
    tau2 = *opts.tau2;
  } else {
    tau2 = tau1;
    for (double t : event_times)
      if (km_value(km, t) > 0.0) tau2 = std::max(tau2, t);
  }
  if (!(tau1 < tau2)) throw std::invalid_argument("cdauc: need tau1 < tau2");
  const double mass = km_value(km, tau1) - km_value(km, tau2);
  if (!(mass > 0.0)) throw std::invalid_argument("cdauc: zero KM mass in the window");

  double total = 0.0;
  double prev = km_value(km, tau1);
  bool any = false;
  for (double t : event_times) {
    if (!(t > tau1) || t > tau2) continue;
    const double st = km_value(km, t);
    const double weight = prev - st;
    prev = st;
    if (weight <= 0.0) continue;

    // AUC(t): cases experienced the event by t, controls are still event-free
    double credit = 0.0;
    std::uint64_t pairs = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& ri = data.records[i];
      if (!ri.event || ri.time > t) continue;
      const double si = interpolate_at(curves[i], t);
      for (std::size_t j = 0; j < data.size(); ++j) {
        if (!(data.records[j].time > t)) continue;
        const double sj = interpolate_at(curves[j], t);
        ++pairs;
        if (si < sj)
          credit += 1.0;
        else if (si == sj)
          credit += 0.5;
      }
    }
    if (pairs == 0)
      throw std::invalid_argument("cdauc: no case/control pairs at an event time in the window");
    total += weight * credit / static_cast<double>(pairs);
    any = true;
  }
  if (!any) throw std::invalid_argument("cdauc: no event times inside the window");
  return total / mass;
}

double ddc(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
           std::size_t num_bins) {
  check_inputs(curves, data);
  if (num_bins < 1) throw std::invalid_argument("ddc: need at least one bin");
  std::vector<std::size_t> counts(num_bins, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.records[i].event) continue;
    const double v = interpolate_at(curves[i], data.records[i].time);
    const auto bin = std::min(static_cast<std::size_t>(v * static_cast<double>(num_bins)),
                              num_bins - 1);
    ++counts[bin];
    ++total;
  }
  if (total == 0) throw std::invalid_argument("ddc: no uncensored records");
  const double q = 1.0 / static_cast<double>(num_bins);
  double kl = 0.0;
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (counts[b] == 0) continue;
    const double p = static_cast<double>(counts[b]) / static_cast<double>(total);
    kl += p * std::log(p / q);
  }
  return kl;
}

namespace {

struct Accumulator {
  std::vector<double> samples;
  std::size_t excluded = 0;

  void add(double v) { samples.push_back(v); }
  MetricSummary summarize(double point) const {
    MetricSummary s;
    s.point = point;
    s.excluded_folds = excluded;
    if (samples.empty()) return s;
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    s.boot_mean = mean;
    s.boot_std =
        samples.size() > 1 ? std::sqrt(var / static_cast<double>(samples.size() - 1)) : 0.0;
    return s;
  }
};

}  // namespace

EvaluationReport bootstrap_evaluate(const std::vector<SurvivalCurve>& curves,
                                    const SurvivalDataset& data, const BootstrapOptions& opts) {
  check_inputs(curves, data);
  if (opts.folds < 2) throw std::invalid_argument("bootstrap_evaluate: need at least 2 folds");
  if (data.records.empty()) throw std::invalid_argument("bootstrap_evaluate: empty dataset");

  EvaluationReport report;
  report.folds = opts.folds;
  report.seed = opts.seed;
  report.n_comparable_pairs = count_comparable_pairs(data).events_and_cens;
  report.n_censored_excluded_from_ddc = data.size() - data.num_events();

  const double point_cindex = cindex_td(curves, data);
  const double point_cdauc = cdauc(curves, data, opts.cdauc);
  const double point_ddc = ddc(curves, data, opts.ddc_bins);

  Accumulator acc_cindex, acc_cdauc, acc_ddc;
  std::mt19937_64 rng(opts.seed);
  const std::size_t n = data.size();
  for (std::size_t fold = 0; fold < opts.folds; ++fold) {
    SurvivalDataset sample;
    sample.feature_names = data.feature_names;
    std::vector<SurvivalCurve> sample_curves;
    sample.records.reserve(n);
    sample_curves.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t idx = uniform_index(rng, n);
      sample.records.push_back(data.records[idx]);
      sample_curves.push_back(curves[idx]);
    }
    try {
      acc_cindex.add(cindex_td(sample_curves, sample));
    } catch (const std::invalid_argument&) {
      ++acc_cindex.excluded;
    }
    try {
      acc_cdauc.add(cdauc(sample_curves, sample, opts.cdauc));
    } catch (const std::invalid_argument&) {
      ++acc_cdauc.excluded;
    }
    try {
      acc_ddc.add(ddc(sample_curves, sample, opts.ddc_bins));
    } catch (const std::invalid_argument&) {
      ++acc_ddc.excluded;
    }
  }

  report.cindex = acc_cindex.summarize(point_cindex);
  report.cdauc = acc_cdauc.summarize(point_cdauc);
  report.ddc = acc_ddc.summarize(point_ddc);
  return report;
}

EvaluationReport bootstrap_evaluate(const TrainedModel& model, const SurvivalDataset& test,
                                    const BootstrapOptions& opts) {
  return bootstrap_evaluate(predict(model, test), test, opts);
}

std::string EvaluationReport::to_json() const {
  nlohmann::json j;
  const auto metric = [](const MetricSummary& s) {
    return nlohmann::json{{"value", s.point},
                          {"bootstrap_mean", s.boot_mean},
                          {"bootstrap_std", s.boot_std},
                          {"excluded_folds", s.excluded_folds}};
  };
  j["cindex_td"] = metric(cindex);
  j["cdauc"] = metric(cdauc);
  j["ddc"] = metric(ddc);
  j["n_comparable_pairs"] = n_comparable_pairs;
  j["ddc_excluded_censored"] = n_censored_excluded_from_ddc;
  j["bootstrap_folds"] = folds;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

}  // namespace dcs
