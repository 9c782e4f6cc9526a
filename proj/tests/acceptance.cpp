// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails. Criterion 7 needs an
// external dataset and is skipped unless DCS_SUPPORT_CSV is set.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dcs/core.hpp"
#include "dcs/data.hpp"
#include "dcs/gradcheck.hpp"
#include "dcs/grids.hpp"
#include "dcs/losses.hpp"
#include "dcs/metrics.hpp"
#include "dcs/model.hpp"
#include "dcs/random.hpp"

namespace fs = std::filesystem;
using namespace dcs;

namespace {

struct Criterion {
  std::string name;
  std::vector<std::string> failures;
  bool skipped = false;
  std::string skip_reason;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void skip(const std::string& reason) {
    skipped = true;
    skip_reason = reason;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

TimeGridPtr make_grid(std::vector<double> nodes) {
  auto g = std::make_shared<TimeGrid>();
  g->nodes = std::move(nodes);
  return g;
}

SurvivalDataset make_dataset(const std::vector<double>& times, const std::vector<bool>& events) {
  SurvivalDataset d;
  for (std::size_t i = 0; i < times.size(); ++i) d.records.push_back({{}, times[i], events[i]});
  return d;
}

// ------------------------------------------------------------ criterion 1

void criterion_1(Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = 10000;
  const int reps = 10;
  for (int ci = 1; ci <= 7; ++ci) {
    const double rate = 0.1 * ci;
    std::vector<double> a_frac, b_frac;
    std::uint64_t pooled_a = 0, pooled_b = 0;
    for (int rep = 0; rep < reps; ++rep) {
      SyntheticSpec spec;
      spec.n = n;
      spec.censoring_rate = rate;
      spec.seed = 4242 + 131 * static_cast<std::uint64_t>(ci) +
                  7919 * static_cast<std::uint64_t>(rep);
      spec.noise_features = 0;
      const auto counts = count_comparable_pairs(generate_synthetic(spec));
      const double n2 = static_cast<double>(n) * static_cast<double>(n);
      a_frac.push_back(static_cast<double>(counts.events_only) / n2);
      b_frac.push_back(static_cast<double>(counts.events_and_cens) / n2);
      pooled_a += counts.events_only;
      pooled_b += counts.events_and_cens;
    }
    const auto check = [&](const std::vector<double>& xs, double target, const char* what) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= xs.size();
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var /= xs.size() - 1;
      const double se = std::sqrt(var / xs.size());
      c.expect(std::abs(mean - target) <= 3.0 * se,
               std::string(what) + " at c=" + fmt(rate) + ": mean " + fmt(mean) + " vs " +
                   fmt(target) + " (3se = " + fmt(3.0 * se) + ")");
    };
    check(a_frac, estimate_comparison_probability(rate, KernelPairs::EventsOnly), "|A|/n^2");
    check(b_frac, estimate_comparison_probability(rate, KernelPairs::EventsAndCensored),
          "|B|/n^2");

    const double f_obs = static_cast<double>(pooled_b) / static_cast<double>(pooled_a);
    const double f_est = 1.0 / (1.0 - rate);
    c.expect(std::abs(f_obs - f_est) <= 0.05 * f_est,
             "F at c=" + fmt(rate) + ": " + fmt(f_obs) + " vs " + fmt(f_est));
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 30.0, "runtime " + fmt(elapsed) + "s exceeds 30s");
}

// ------------------------------------------------------------ criterion 2

void criterion_2(Criterion& c) {
  SyntheticSpec spec;
  spec.n = 20000;
  spec.censoring_rate = 0.7;
  spec.censoring = CensoringMode::CompetingLate;
  spec.seed = 9001;
  spec.noise_features = 0;
  const auto data = generate_synthetic(spec);
  const auto factor = comparison_factor(data);
  c.expect(factor.f_observed.has_value(), "observed factor undefined");
  if (!factor.f_observed) return;
  c.expect(*factor.f_observed >= 3.0 && *factor.f_observed <= 6.0,
           "F = " + fmt(*factor.f_observed) + " outside [3, 6]");
  // late-skewed censoring produces more comparisons than the uniform
  // independence estimate predicts
  c.expect(*factor.f_observed > 1.0 / (1.0 - 0.7),
           "F = " + fmt(*factor.f_observed) + " does not exceed the uniform estimate");
  c.expect(std::abs(data.censoring_rate() - 0.7) < 0.02,
           "competing mode censoring rate " + fmt(data.censoring_rate()) + " far from 0.7");
}

// ------------------------------------------------------------ criterion 3

double curve_at_oracle(const SurvivalCurve& curve, double t) {
  const auto& nodes = curve.grid->nodes;
  const auto& v = curve.values;
  if (t >= nodes.back()) return v.back();
  if (t <= nodes.front()) return 1.0 + (v.front() - 1.0) * (t / nodes.front());
  std::size_t k = 0;
  while (nodes[k + 1] < t) ++k;
  if (nodes[k + 1] == t) return v[k + 1];
  return v[k] + (v[k + 1] - v[k]) * (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
}

double cindex_brute_force(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data,
                          bool* defined) {
  double credit = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.size(); ++j) {
      if (i == j || !data.records[i].event) continue;
      if (!(data.records[i].time < data.records[j].time)) continue;
      ++pairs;
      const double si = curve_at_oracle(curves[i], data.records[i].time);
      const double sj = curve_at_oracle(curves[j], data.records[i].time);
      credit += si < sj ? 1.0 : si == sj ? 0.5 : 0.0;
    }
  }
  *defined = pairs > 0;
  return pairs > 0 ? credit / static_cast<double>(pairs) : 0.0;
}

void criterion_3(Criterion& c) {
  std::mt19937_64 rng(2024);
  std::size_t compared = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 3 + uniform_index(rng, 48);
    std::vector<double> times;
    std::vector<bool> events;
    for (std::size_t i = 0; i < n; ++i) {
      times.push_back(uniform_open(rng) * 40.0);
      events.push_back(uniform_unit(rng) < 0.6);
    }
    const auto data = make_dataset(times, events);
    const auto grid = make_grid({4, 10, 18, 27, 36});
    std::vector<SurvivalCurve> curves;
    for (std::size_t i = 0; i < n; ++i) {
      HazardSequence h{grid, {}};
      for (std::size_t l = 0; l < grid->size(); ++l) h.hazards.push_back(uniform_unit(rng));
      curves.push_back(survival_from_hazards(h));
    }
    bool defined = false;
    const double oracle = cindex_brute_force(curves, data, &defined);
    if (!defined) continue;
    ++compared;
    const double value = cindex_td(curves, data);
    if (value != oracle) {
      c.expect(false, "rep " + std::to_string(rep) + ": cindex " + fmt(value) +
                          " != brute force " + fmt(oracle));
      return;
    }
  }
  c.expect(compared >= 150, "only " + std::to_string(compared) + " comparable datasets");

  // three hand-evaluated weighted-AUC fixtures
  {
    const auto grid = make_grid({1, 2, 3, 4, 5});
    const auto data = make_dataset({1, 2, 3, 4, 5}, {true, true, false, true, false});
    const std::vector<SurvivalCurve> curves = {{grid, {0.30, 0.20, 0.15, 0.10, 0.05}},
                                               {grid, {0.70, 0.50, 0.40, 0.30, 0.20}},
                                               {grid, {0.80, 0.40, 0.35, 0.30, 0.25}},
                                               {grid, {0.90, 0.70, 0.60, 0.55, 0.50}},
                                               {grid, {0.95, 0.90, 0.85, 0.80, 0.75}}};
    CdaucOptions opts;
    opts.tau1 = 1.0;
    opts.tau2 = 4.0;
    const double v = cdauc(curves, data, opts);
    c.expect(std::abs(v - 14.0 / 15.0) < 1e-12,
             "fixture 1: " + fmt(v) + " vs 14/15 = " + fmt(14.0 / 15.0));
  }
  {
    const auto grid = make_grid({2, 4, 6, 8});
    const auto data = make_dataset({2, 4, 5, 6, 8}, {true, true, true, false, false});
    const std::vector<SurvivalCurve> curves = {{grid, {0.40, 0.20, 0.10, 0.05}},
                                               {grid, {0.60, 0.50, 0.30, 0.20}},
                                               {grid, {0.75, 0.50, 0.40, 0.35}},
                                               {grid, {0.85, 0.70, 0.60, 0.50}},
                                               {grid, {0.95, 0.90, 0.80, 0.70}}};
    const double v = cdauc(curves, data);
    c.expect(std::abs(v - 23.0 / 24.0) < 1e-12,
             "fixture 2: " + fmt(v) + " vs 23/24 = " + fmt(23.0 / 24.0));
  }
  {
    const auto grid = make_grid({2, 4});
    const auto data = make_dataset({1, 3, 3, 7, 9}, {true, true, false, true, false});
    const std::vector<SurvivalCurve> curves = {{grid, {0.5, 0.3}},
                                               {grid, {0.6, 0.4}},
                                               {grid, {0.7, 0.5}},
                                               {grid, {0.4, 0.3}},
                                               {grid, {0.9, 0.7}}};
    CdaucOptions opts;
    opts.tau1 = 1.0;
    opts.tau2 = 7.0;
    const double v = cdauc(curves, data, opts);
    c.expect(std::abs(v - 4.0 / 5.0) < 1e-12, "fixture 3: " + fmt(v) + " vs 4/5");
  }
}

// ------------------------------------------------------------ criterion 4

void criterion_4(Criterion& c) {
  std::mt19937_64 rng(515);
  const auto grid = make_grid({1, 100});
  const std::size_t n = 10000;
  std::vector<double> times;
  std::vector<bool> events;
  std::vector<SurvivalCurve> uniform_curves, one_bin_curves;
  for (std::size_t i = 0; i < n; ++i) {
    times.push_back(1.0 + 99.0 * uniform_unit(rng));
    events.push_back(true);
    uniform_curves.push_back({grid, std::vector<double>(2, uniform_unit(rng))});
    one_bin_curves.push_back({grid, {0.55, 0.55}});
  }
  const auto data = make_dataset(times, events);
  const double calibrated = ddc(uniform_curves, data);
  c.expect(calibrated < 0.01, "uniform-by-construction ddc " + fmt(calibrated) + " >= 0.01");
  const double one_bin = ddc(one_bin_curves, data);
  c.expect(std::abs(one_bin - std::log(10.0)) < 1e-12,
           "one-bin ddc " + fmt(one_bin) + " vs ln(10)");
}

// ------------------------------------------------------------ criterion 5

void criterion_5(Criterion& c) {
  const auto start = std::chrono::steady_clock::now();

  ModelConfig mcfg;
  mcfg.encoder_layers = {8};
  mcfg.decoder_layers = {8};
  mcfg.bidirectional = true;
  mcfg.lstm_skip = true;
  mcfg.aggregation_layers = {8};
  mcfg.grid = GridSpec{GridSpacing::Linear, 6, 10.0, std::nullopt};
  mcfg.dropout_rate = 0.0;
  mcfg.seed = 77;

  SurvivalDataset batch;
  std::mt19937_64 rng(33);
  for (int i = 0; i < 5; ++i) {
    SurvivalRecord rec;
    rec.features = {normal_sample(rng), normal_sample(rng), normal_sample(rng)};
    rec.time = 0.5 + 9.0 * uniform_unit(rng);
    rec.event = uniform_unit(rng) < 0.6;
    batch.records.push_back(rec);
  }
  const TimeGrid grid = build_grid(mcfg.grid, batch);
  nn::Tensor features(5, 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) features.at(i, j) = batch.records[i].features[j];

  LossConfig loss_cfg;  // the normalized combined objective
  DcsNetwork net(mcfg, 3);
  std::mt19937_64 unused(0);

  const auto loss_value = [&]() {
    nn::Graph g;
    const auto pass = net.forward(g, features, grid.size(), false, unused);
    return g.value(combined_loss_node(g, pass.survival, batch, grid, loss_cfg)).values[0];
  };

  nn::Graph g;
  const auto pass = net.forward(g, features, grid.size(), false, unused);
  g.backward(combined_loss_node(g, pass.survival, batch, grid, loss_cfg));
  std::vector<double> analytic;
  for (const nn::Var v : pass.param_vars) {
    const auto& grad = g.grad(v);
    analytic.insert(analytic.end(), grad.begin(), grad.end());
  }

  std::vector<double> fd;
  const double h = 1e-5;
  for (auto& param : net.params()) {
    for (double& value : param.value.values) {
      const double orig = value;
      value = orig + h;
      const double up = loss_value();
      value = orig - h;
      const double down = loss_value();
      value = orig;
      fd.push_back((up - down) / (2.0 * h));
    }
  }
  const double err = nn::max_relative_error(analytic, fd);
  c.expect(err < 1e-4, "max relative gradient error " + fmt(err) + " over " +
                           std::to_string(fd.size()) + " parameters");
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 10.0, "runtime " + fmt(elapsed) + "s exceeds 10s");
}

// ------------------------------------------------------------ criterion 6

void criterion_6(Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto data = generate_two_cluster(500, 0.2, 2);
  const auto [train_set, test_set] = stratified_split(data, 0.2, 102);

  const auto run = [&](double lambda) {
    ModelConfig mcfg;
    mcfg.encoder_layers = {16};
    mcfg.decoder_layers = {16};
    mcfg.bidirectional = true;
    mcfg.lstm_skip = true;
    mcfg.aggregation_layers = {16, 16};
    mcfg.grid = GridSpec{GridSpacing::Quantile, 6, std::nullopt, std::nullopt};
    mcfg.loss.lambda = lambda;
    mcfg.loss.sigma = 1.0;
    mcfg.dropout_rate = 0.2;
    mcfg.seed = 1;
    const TrainConfig tcfg;  // batch 50, 100 epochs, patience 10
    const auto result = train(train_set, mcfg, tcfg);
    const auto curves = predict(result.model, test_set);
    return std::pair{cindex_td(curves, test_set), cdauc(curves, test_set)};
  };

  const auto [full_ci, full_auc] = run(1.0);
  const auto [ablation_ci, ablation_auc] = run(0.0);
  (void)ablation_auc;

  c.expect(full_ci > 0.70, "full model cindex " + fmt(full_ci) + " <= 0.70");
  c.expect(full_auc > 0.70, "full model cdauc " + fmt(full_auc) + " <= 0.70");
  c.expect(full_ci - ablation_ci >= 0.02, "ablation gap " + fmt(full_ci - ablation_ci) +
                                              " < 0.02 (full " + fmt(full_ci) + ", lambda=0 " +
                                              fmt(ablation_ci) + ")");
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 300.0, "runtime " + fmt(elapsed) + "s exceeds 5min");
}

// ------------------------------------------------------------ criterion 7

void criterion_7(Criterion& c) {
  const char* path = std::getenv("DCS_SUPPORT_CSV");
  if (path == nullptr || std::string(path).empty()) {
    c.skip("set DCS_SUPPORT_CSV to a SUPPORT-format CSV to enable");
    return;
  }
  const char* time_col = std::getenv("DCS_SUPPORT_TIME");
  const char* event_col = std::getenv("DCS_SUPPORT_EVENT");
  DatasetSchema schema;
  schema.time_column = time_col ? time_col : "duration";
  schema.event_column = event_col ? event_col : "event";
  const RawTable table = load_csv(path, schema);
  const auto time_idx = *table.column_index(schema.time_column);
  const auto event_idx = *table.column_index(schema.event_column);
  SurvivalDataset data;
  for (const auto& row : table.rows)
    data.records.push_back({{}, std::stod(row[time_idx]), row[event_idx] == "1"});

  const auto factor = comparison_factor(data);
  c.expect(std::abs(factor.censoring_rate - 0.32) <= 0.01,
           "censoring rate " + fmt(factor.censoring_rate) + " outside 32% +- 1%");
  c.expect(std::abs(static_cast<double>(factor.count_events_only) - 1.81e7) <= 0.01 * 1.81e7,
           "|A| = " + std::to_string(factor.count_events_only) + " not within 1% of 1.81e7");
  c.expect(std::abs(static_cast<double>(factor.count_events_and_cens) - 3.41e7) <=
               0.01 * 3.41e7,
           "|B| = " + std::to_string(factor.count_events_and_cens) + " not within 1% of 3.41e7");
  c.expect(factor.f_observed && std::abs(*factor.f_observed - 1.9) <= 0.05,
           "F = " + (factor.f_observed ? fmt(*factor.f_observed) : "absent") +
               " outside 1.9 +- 0.05");
}

// ------------------------------------------------------------ criterion 8

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void criterion_8(Criterion& c) {
  // survival monotonicity on 1e4 random hazard vectors
  {
    std::mt19937_64 rng(81);
    for (int rep = 0; rep < 10000; ++rep) {
      const std::size_t L = 2 + uniform_index(rng, 24);
      std::vector<double> nodes;
      double t = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        t += 0.1 + uniform_unit(rng);
        nodes.push_back(t);
      }
      HazardSequence h{make_grid(nodes), {}};
      for (std::size_t l = 0; l < L; ++l) h.hazards.push_back(uniform_unit(rng));
      const auto s = survival_from_hazards(h);
      for (std::size_t l = 0; l < L; ++l) {
        const double prev = l == 0 ? 1.0 : s.values[l - 1];
        if (!(s.values[l] >= 0.0 && s.values[l] <= 1.0 && s.values[l] <= prev)) {
          c.expect(false, "monotonicity violated at rep " + std::to_string(rep));
          return;
        }
      }
    }
  }

  // quantile balance on 100 random datasets
  {
    std::mt19937_64 rng(82);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = 30 + uniform_index(rng, 300);
      std::vector<double> times;
      std::vector<bool> events;
      for (std::size_t i = 0; i < n; ++i) {
        times.push_back(uniform_open(rng) * 80.0);
        events.push_back(uniform_unit(rng) < 0.6);
      }
      const auto data = make_dataset(times, events);
      const std::size_t L = 2 + uniform_index(rng, 12);
      const auto grid = build_grid(GridSpec{GridSpacing::Quantile, L, {}, {}}, data);
      const auto counts = event_histogram(data, grid);
      for (const auto& bucket : counts) {
        const std::size_t total = bucket.events + bucket.censorings;
        if (total < n / L || total > n / L + 1) {
          c.expect(false, "quantile imbalance at rep " + std::to_string(rep));
          return;
        }
      }
    }
  }

  // mask inclusion on 100 random datasets
  {
    std::mt19937_64 rng(83);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = 2 + uniform_index(rng, 60);
      std::vector<double> times;
      std::vector<bool> events;
      for (std::size_t i = 0; i < n; ++i) {
        times.push_back(1.0 + std::floor(uniform_unit(rng) * 15.0));
        events.push_back(uniform_unit(rng) < 0.5);
      }
      const auto data = make_dataset(times, events);
      const auto a = build_mask(data, KernelPairs::EventsOnly);
      const auto b = build_mask(data, KernelPairs::EventsAndCensored);
      std::set<std::pair<std::uint32_t, std::uint32_t>> bset(b.pairs.begin(), b.pairs.end());
      bool ok = b.pairs.size() >= a.pairs.size();
      for (const auto& p : a.pairs) ok = ok && bset.count(p) == 1;
      if (!ok) {
        c.expect(false, "mask inclusion violated at rep " + std::to_string(rep));
        return;
      }
    }
  }

  // duplication invariance of the normalized objective
  {
    std::mt19937_64 rng(84);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 2 + uniform_index(rng, 30);
      std::vector<double> times;
      std::vector<bool> events;
      for (std::size_t i = 0; i < n; ++i) {
        times.push_back(uniform_open(rng) * 12.0);
        events.push_back(uniform_unit(rng) < 0.6);
      }
      const auto data = make_dataset(times, events);
      const auto grid = make_grid({2, 5, 8, 11});
      std::vector<SurvivalCurve> curves;
      for (std::size_t i = 0; i < n; ++i) {
        HazardSequence h{grid, {}};
        for (std::size_t l = 0; l < 4; ++l) h.hazards.push_back(uniform_unit(rng));
        curves.push_back(survival_from_hazards(h));
      }
      SurvivalDataset doubled = data;
      auto doubled_curves = curves;
      for (std::size_t i = 0; i < n; ++i) {
        doubled.records.push_back(data.records[i]);
        doubled_curves.push_back(curves[i]);
      }
      LossConfig cfg;
      cfg.lambda = 1.4;
      cfg.sigma = 0.8;
      const double one = combined_loss(curves, data, *grid, cfg);
      const double two = combined_loss(doubled_curves, doubled, *grid, cfg);
      if (!(std::abs(one - two) <= 1e-9 * std::max(std::abs(one), 1.0))) {
        c.expect(false, "duplication drift " + fmt(std::abs(one - two)) + " at rep " +
                            std::to_string(rep));
        return;
      }
    }
  }

  // byte-identical reruns of every CLI command
  const char* cli = std::getenv("DCS_CLI_BIN");
  if (cli == nullptr) {
    c.expect(false, "DCS_CLI_BIN not set; run through ctest");
    return;
  }
  const fs::path dir = fs::temp_directory_path() / "dcs_acceptance_cli";
  fs::create_directories(dir);
  const auto run = [&](const std::string& args) {
    const std::string cmd =
        std::string(cli) + " " + args + " > " + (dir / "stdout.txt").string() + " 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };

  const auto synth_out = [&](int i) { return (dir / ("synth" + std::to_string(i) + ".csv")); };
  for (int i : {1, 2})
    c.expect(run("synth --n 400 --censoring 0.25 --distribution clusters --seed 6 --output " +
                 synth_out(i).string()) == 0,
             "synth run failed");
  c.expect(read_file(synth_out(1)) == read_file(synth_out(2)), "synth reruns differ");

  for (int i : {1, 2})
    c.expect(run("compare-counts --sweep 0.2,0.6 --n 4000 --seed 5 --output " +
                 (dir / ("cc" + std::to_string(i) + ".csv")).string()) == 0,
             "compare-counts run failed");
  c.expect(read_file(dir / "cc1.csv") == read_file(dir / "cc2.csv"),
           "compare-counts reruns differ");

  for (int i : {1, 2})
    c.expect(run("grid-info --data " + synth_out(1).string() + " --nodes 8 --output " +
                 (dir / ("gi" + std::to_string(i) + ".csv")).string()) == 0,
             "grid-info run failed");
  c.expect(read_file(dir / "gi1.csv") == read_file(dir / "gi2.csv"), "grid-info reruns differ");

  for (int i : {1, 2}) {
    const fs::path out = dir / ("out" + std::to_string(i));
    const fs::path config = dir / ("config" + std::to_string(i) + ".json");
    std::ofstream(config) << R"({
  "seed": 4,
  "data": {"path": ")" << synth_out(1).string() << R"(",
           "schema": {"time_column": "time", "event_column": "event"},
           "test_fraction": 0.2},
  "model": {"encoder_layers": [8], "decoder_layers": [8], "bidirectional": true,
            "lstm_skip": true, "grid": {"spacing": "quantile", "num_nodes": 6},
            "loss": {"lambda": 1.0, "sigma": 1.0}, "dropout_rate": 0.2},
  "train": {"batch_size": 50, "max_epochs": 5, "early_stop_patience": 10,
            "validation_fraction": 0.2, "learning_rate": 0.001},
  "output_dir": ")" << out.string() << R"("
})";
    c.expect(run("train --config " + config.string()) == 0, "train run failed");
  }
  for (const char* name : {"checkpoint.bin", "manifest.json", "training_log.csv", "test.csv"})
    c.expect(read_file(dir / "out1" / name) == read_file(dir / "out2" / name),
             std::string("train reruns differ in ") + name);

  for (int i : {1, 2})
    c.expect(run("evaluate --checkpoint " + (dir / "out1" / "checkpoint.bin").string() +
                 " --manifest " + (dir / "out1" / "manifest.json").string() + " --data " +
                 (dir / "out1" / "test.csv").string() + " --folds 5 --seed 3 --output " +
                 (dir / ("report" + std::to_string(i) + ".json")).string()) == 0,
             "evaluate run failed");
  c.expect(read_file(dir / "report1.json") == read_file(dir / "report2.json"),
           "evaluate reruns differ");
}

}  // namespace

int main() {
  struct Entry {
    std::string name;
    std::function<void(Criterion&)> fn;
  };
  const std::vector<Entry> entries = {
      {"1: uniform-flag comparison counts match the closed forms", criterion_1},
      {"2: late-censoring mode lands in the 3x-6x window at c=0.7", criterion_2},
      {"3: rank metrics equal their independent oracles", criterion_3},
      {"4: calibration metric endpoints", criterion_4},
      {"5: full-network gradient versus central differences", criterion_5},
      {"6: learning signal and kernel-ablation gap on two clusters", criterion_6},
      {"7: SUPPORT comparison counts (external data)", criterion_7},
      {"8: invariant suites and byte-identical CLI reruns", criterion_8},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    Criterion c;
    c.name = entry.name;
    try {
      entry.fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    if (c.skipped) {
      std::cout << "[SKIP] criterion " << c.name << " (" << c.skip_reason << ")\n";
      continue;
    }
    if (c.failures.empty()) {
      std::cout << "[PASS] criterion " << c.name << "\n";
    } else {
      ++failures;
      std::cout << "[FAIL] criterion " << c.name << "\n";
      for (const auto& f : c.failures) std::cout << "       " << f << "\n";
    }
  }
  if (failures > 0) std::cout << failures << " criterion(s) failed\n";
  return failures == 0 ? 0 : 1;
}
