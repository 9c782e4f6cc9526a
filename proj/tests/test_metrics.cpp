#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dcs/metrics.hpp"
#include "dcs/random.hpp"
#include "testutil.hpp"

using namespace dcs;
using testutil::make_curve;
using testutil::make_dataset;
using testutil::make_grid;

namespace {

// Brute-force concordance enumerator with its own interpolation arithmetic;
// the oracle cindex_td is checked against.
double curve_at_oracle(const SurvivalCurve& c, double t) {
  const auto& nodes = c.grid->nodes;
  const auto& v = c.values;
  if (t >= nodes.back()) return v.back();
  if (t <= nodes.front()) return 1.0 + (v.front() - 1.0) * (t / nodes.front());
  std::size_t k = 0;
  while (nodes[k + 1] < t) ++k;
  if (nodes[k + 1] == t) return v[k + 1];
  return v[k] + (v[k + 1] - v[k]) * (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
}

double cindex_oracle(const std::vector<SurvivalCurve>& curves, const SurvivalDataset& data) {
  double credit = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.size(); ++j) {
      if (i == j) continue;
      if (!data.records[i].event) continue;
      if (!(data.records[i].time < data.records[j].time)) continue;
      ++pairs;
      const double si = curve_at_oracle(curves[i], data.records[i].time);
      const double sj = curve_at_oracle(curves[j], data.records[i].time);
      if (si < sj)
        credit += 1.0;
      else if (si == sj)
        credit += 0.5;
    }
  }
  if (pairs == 0) return std::nan("");
  return credit / static_cast<double>(pairs);
}

// Curves ordered consistently with the observed times at every evaluation
// point: S_i(t) = exp(-t / z_i).
std::vector<SurvivalCurve> oracle_curves(const SurvivalDataset& data, const TimeGridPtr& grid) {
  std::vector<SurvivalCurve> curves;
  for (const auto& r : data.records) {
    std::vector<double> values;
    for (double t : grid->nodes) values.push_back(std::exp(-t / r.time));
    curves.push_back(make_curve(grid, values));
  }
  return curves;
}

std::vector<SurvivalCurve> constant_curves(const SurvivalDataset& data, const TimeGridPtr& grid,
                                           double value) {
  std::vector<SurvivalCurve> curves;
  for (std::size_t i = 0; i < data.size(); ++i)
    curves.push_back(make_curve(grid, std::vector<double>(grid->size(), value)));
  return curves;
}

SurvivalDataset random_dataset(std::mt19937_64& rng, std::size_t max_n = 50) {
  const std::size_t n = 3 + uniform_index(rng, max_n - 2);
  std::vector<double> times;
  std::vector<bool> events;
  for (std::size_t i = 0; i < n; ++i) {
    times.push_back(uniform_open(rng) * 30.0);
    events.push_back(uniform_unit(rng) < 0.65);
  }
  return make_dataset(times, events);
}

std::vector<SurvivalCurve> random_curves(const SurvivalDataset& data, const TimeGridPtr& grid,
                                         std::mt19937_64& rng) {
  std::vector<SurvivalCurve> curves;
  for (std::size_t i = 0; i < data.size(); ++i) {
    HazardSequence h{grid, {}};
    for (std::size_t l = 0; l < grid->size(); ++l) h.hazards.push_back(uniform_unit(rng));
    curves.push_back(survival_from_hazards(h));
  }
  return curves;
}

}  // namespace

TEST_CASE("cindex_td basics") {
  const auto grid = make_grid({1, 2, 3, 4, 5});

  SUBCASE("perfectly anti-ordered predictions score one") {
    const auto data = make_dataset({1, 2, 3, 4, 5}, {true, true, false, true, false});
    CHECK(cindex_td(oracle_curves(data, grid), data) == 1.0);
  }
  SUBCASE("identical predictions score one half") {
    const auto data = make_dataset({1, 2, 3, 4}, {true, true, true, false});
    CHECK(cindex_td(constant_curves(data, grid, 0.7), data) == 0.5);
  }
  SUBCASE("one discordant pair out of four") {
    const auto data = make_dataset({1, 2, 3, 4}, {true, false, true, false});
    // comparable: (0,1), (0,2), (0,3) at z=1 and (2,3) at z=3
    auto curves = oracle_curves(data, grid);
    // flip only (2,3): record 3 stays above record 0 at z=1 (0.6 > e^-1) but
    // falls below record 2 at z=3 (0.2 < e^-1)
    curves[3] = make_curve(grid, {0.6, 0.4, 0.2, 0.15, 0.1});
    const double expected = 0.75;
    CHECK(cindex_td(curves, data) == doctest::Approx(expected));
    CHECK(cindex_oracle(curves, data) == doctest::Approx(expected));
  }
  SUBCASE("no comparable pairs is an error") {
    const auto data = make_dataset({2, 2}, {true, true});
    CHECK_THROWS_AS(static_cast<void>(cindex_td(constant_curves(data, grid, 0.5), data)),
                    std::invalid_argument);
  }
}

TEST_CASE("cindex_td equals the brute-force enumerator on random data") {
  std::mt19937_64 rng(101);
  int compared = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto data = random_dataset(rng);
    const auto grid = make_grid({2, 6, 12, 20, 28});
    const auto curves = random_curves(data, grid, rng);
    const double oracle = cindex_oracle(curves, data);
    if (std::isnan(oracle)) {
      CHECK_THROWS_AS(static_cast<void>(cindex_td(curves, data)), std::invalid_argument);
      continue;
    }
    CHECK(cindex_td(curves, data) == oracle);
    ++compared;
  }
  CHECK(compared > 150);
}

TEST_CASE("cdauc worked fixtures") {
  SUBCASE("fixture 1: mixed censoring, explicit window") {
    const auto grid = make_grid({1, 2, 3, 4, 5});
    const auto data = make_dataset({1, 2, 3, 4, 5}, {true, true, false, true, false});
    const std::vector curves = {make_curve(grid, {0.30, 0.20, 0.15, 0.10, 0.05}),
                                make_curve(grid, {0.70, 0.50, 0.40, 0.30, 0.20}),
                                make_curve(grid, {0.80, 0.40, 0.35, 0.30, 0.25}),
                                make_curve(grid, {0.90, 0.70, 0.60, 0.55, 0.50}),
                                make_curve(grid, {0.95, 0.90, 0.85, 0.80, 0.75})};
    // KM: 4/5 at t=1, 3/5 at t=2, 3/10 at t=4.
    // AUC(2) = 5/6 (one discordant pair of six), AUC(4) = 1.
    // CDAUC = ((1/5)(5/6) + (3/10)(1)) / (1/2) = 14/15.
    CdaucOptions opts;
    opts.tau1 = 1.0;
    opts.tau2 = 4.0;
    CHECK(cdauc(curves, data, opts) == doctest::Approx(14.0 / 15.0).epsilon(1e-12));
  }
  SUBCASE("fixture 2: prediction tie, default window") {
    const auto grid = make_grid({2, 4, 6, 8});
    const auto data = make_dataset({2, 4, 5, 6, 8}, {true, true, true, false, false});
    const std::vector curves = {make_curve(grid, {0.40, 0.20, 0.10, 0.05}),
                                make_curve(grid, {0.60, 0.50, 0.30, 0.20}),
                                make_curve(grid, {0.75, 0.50, 0.40, 0.35}),
                                make_curve(grid, {0.85, 0.70, 0.60, 0.50}),
                                make_curve(grid, {0.95, 0.90, 0.80, 0.70})};
    // Defaults: tau1 = 2 (first event), tau2 = 5 (last event with KM > 0).
    // KM: 4/5, 3/5, 2/5 at t = 2, 4, 5.
    // AUC(4) = 11/12 (one tied pair), AUC(5) = 1 at interpolated values.
    // CDAUC = ((1/5)(11/12) + (1/5)(1)) / (2/5) = 23/24.
    CHECK(cdauc(curves, data) == doctest::Approx(23.0 / 24.0).epsilon(1e-12));
  }
  SUBCASE("fixture 3: censored at an event time, off-grid evaluation") {
    const auto grid = make_grid({2, 4});
    const auto data = make_dataset({1, 3, 3, 7, 9}, {true, true, false, true, false});
    const std::vector curves = {make_curve(grid, {0.5, 0.3}), make_curve(grid, {0.6, 0.4}),
                                make_curve(grid, {0.7, 0.5}), make_curve(grid, {0.4, 0.3}),
                                make_curve(grid, {0.9, 0.7})};
    // KM: 4/5 at 1, 3/5 at 3 (the record censored at 3 is still at risk),
    // 3/10 at 7. AUC(3) = 1/2 at midpoint-interpolated values; AUC(7) = 1
    // with every curve clamped past the last node.
    // CDAUC = ((1/5)(1/2) + (3/10)(1)) / (1/2) = 4/5.
    CdaucOptions opts;
    opts.tau1 = 1.0;
    opts.tau2 = 7.0;
    CHECK(cdauc(curves, data, opts) == doctest::Approx(4.0 / 5.0).epsilon(1e-12));
  }
  SUBCASE("identical predictions score one half") {
    const auto grid = make_grid({1, 2, 3, 4});
    const auto data = make_dataset({1, 2, 3, 4, 5}, {true, true, true, true, false});
    CHECK(cdauc(constant_curves(data, grid, 0.4), data) == doctest::Approx(0.5));
  }
  SUBCASE("undefined windows raise errors") {
    const auto grid = make_grid({1, 2});
    const auto data = make_dataset({1, 2, 3}, {true, false, false});
    const auto curves = constant_curves(data, grid, 0.5);
    CdaucOptions opts;  // only one event time: empty open window
    CHECK_THROWS_AS(static_cast<void>(cdauc(curves, data, opts)), std::invalid_argument);
    const auto censored = make_dataset({1, 2, 3}, {false, false, false});
    CHECK_THROWS_AS(static_cast<void>(cdauc(constant_curves(censored, grid, 0.5), censored)),
                    std::invalid_argument);
  }
}

TEST_CASE("rank metrics depend only on the ordering of the compared values") {
  // Comparisons happen at the observed times. With observed times on the
  // grid nodes the compared values are node values, so any strictly monotone
  // transform of them preserves (or, decreasing, exactly flips) both metrics.
  std::mt19937_64 rng(103);
  const std::vector<double> nodes = {3, 9, 15, 21};
  const auto grid = make_grid(nodes);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 6 + uniform_index(rng, 30);
    std::vector<double> times;
    std::vector<bool> events;
    for (std::size_t i = 0; i < n; ++i) {
      times.push_back(nodes[uniform_index(rng, nodes.size())]);
      events.push_back(uniform_unit(rng) < 0.7);
    }
    const auto data = make_dataset(times, events);
    const auto curves = random_curves(data, grid, rng);

    std::vector<SurvivalCurve> cubed, flipped;
    for (const auto& c : curves) {
      std::vector<double> up, down;
      for (double v : c.values) {
        up.push_back(v * v * v);
        down.push_back(1.0 - v);
      }
      cubed.push_back(make_curve(grid, up));
      flipped.push_back(make_curve(grid, down));
    }
    double base_c;
    try {
      base_c = cindex_td(curves, data);
    } catch (const std::invalid_argument&) {
      continue;
    }
    CHECK(cindex_td(cubed, data) == doctest::Approx(base_c).epsilon(1e-12));
    CHECK(cindex_td(flipped, data) == doctest::Approx(1.0 - base_c).epsilon(1e-12));
    try {
      const double base_a = cdauc(curves, data);
      CHECK(cdauc(cubed, data) == doctest::Approx(base_a).epsilon(1e-12));
      CHECK(cdauc(flipped, data) == doctest::Approx(1.0 - base_a).epsilon(1e-12));
    } catch (const std::invalid_argument&) {
    }
  }

  // Off-node observed times: increasing affine maps commute with the linear
  // interpolation, so invariance holds for arbitrary datasets too.
  for (int rep = 0; rep < 20; ++rep) {
    const auto data = random_dataset(rng, 30);
    const auto curves = random_curves(data, grid, rng);
    std::vector<SurvivalCurve> affine;
    for (const auto& c : curves) {
      std::vector<double> values;
      for (double v : c.values) values.push_back(0.3 * v + 0.5);
      affine.push_back(make_curve(grid, values));
    }
    try {
      const double base_c = cindex_td(curves, data);
      CHECK(cindex_td(affine, data) == doctest::Approx(base_c).epsilon(1e-12));
      const double base_a = cdauc(curves, data);
      CHECK(cdauc(affine, data) == doctest::Approx(base_a).epsilon(1e-12));
    } catch (const std::invalid_argument&) {
    }
  }
}

TEST_CASE("perfect predictions max out both metrics on every spacing") {
  const auto data = make_dataset({1.5, 3.2, 4.4, 6.1, 7.9, 9.3, 11.0, 12.8},
                                 {true, true, false, true, true, false, true, false});
  for (const auto& nodes :
       {std::vector<double>{3, 6, 9, 12}, std::vector<double>{1, 2, 4, 8, 16},
        std::vector<double>{1.5, 4.4, 7.9, 12.8}}) {
    const auto grid = make_grid(nodes);
    const auto curves = oracle_curves(data, grid);
    CHECK(cindex_td(curves, data) == 1.0);
    CHECK(cdauc(curves, data) == doctest::Approx(1.0));
  }
}

TEST_CASE("ddc") {
  const auto grid = make_grid({1, 2});

  SUBCASE("uniform occupancy scores zero") {
    std::vector<double> times;
    std::vector<bool> events;
    std::vector<SurvivalCurve> curves;
    for (int rep = 0; rep < 2; ++rep)
      for (int b = 0; b < 10; ++b) {
        times.push_back(1.5);
        events.push_back(true);
        curves.push_back(make_curve(grid, {0.05 + 0.1 * b, 0.05 + 0.1 * b}));
      }
    CHECK(ddc(curves, make_dataset(times, events)) == 0.0);
  }
  SUBCASE("all mass in one bin scores ln(10)") {
    const auto data = make_dataset({1.5, 1.5, 1.5}, {true, true, true});
    const double v = ddc(constant_curves(data, grid, 0.55), data);
    CHECK(std::abs(v - std::log(10.0)) < 1e-12);
  }
  SUBCASE("two-bin worked example") {
    std::vector<double> times(5, 1.5);
    std::vector<bool> events(5, true);
    std::vector<SurvivalCurve> curves;
    curves.push_back(make_curve(grid, {0.3, 0.3}));
    for (int i = 0; i < 4; ++i) curves.push_back(make_curve(grid, {0.8, 0.8}));
    const double expected = 0.2 * std::log(0.2 / 0.5) + 0.8 * std::log(0.8 / 0.5);
    CHECK(ddc(curves, make_dataset(times, events), 2) == doctest::Approx(expected));
    CHECK(expected == doctest::Approx(0.1927).epsilon(1e-3));
  }
  SUBCASE("censored records are excluded") {
    const auto data = make_dataset({1.5, 1.5}, {true, false});
    const std::vector curves = {make_curve(grid, {0.55, 0.55}), make_curve(grid, {0.95, 0.95})};
    CHECK(std::abs(ddc(curves, data) - std::log(10.0)) < 1e-12);  // only the event counts
  }
  SUBCASE("no uncensored records is an error") {
    const auto data = make_dataset({1.5}, {false});
    CHECK_THROWS_AS(static_cast<void>(ddc(constant_curves(data, grid, 0.5), data)),
                    std::invalid_argument);
  }
  SUBCASE("survival exactly one lands in the top bin") {
    const auto data = make_dataset({1.5}, {true});
    const std::vector curves = {make_curve(grid, {1.0, 1.0})};
    CHECK(std::abs(ddc(curves, data) - std::log(10.0)) < 1e-12);
  }
}

TEST_CASE("calibrated-by-construction predictions drive ddc to zero") {
  std::mt19937_64 rng(107);
  const auto grid = make_grid({1, 100});
  std::vector<double> times;
  std::vector<bool> events;
  std::vector<SurvivalCurve> curves;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    times.push_back(1.0 + 99.0 * uniform_unit(rng));
    events.push_back(true);
    curves.push_back(make_curve(grid, std::vector<double>(2, uniform_unit(rng))));
  }
  CHECK(ddc(curves, make_dataset(times, events)) < 0.01);
}

TEST_CASE("bootstrap_evaluate") {
  SUBCASE("constant predictions give zero spread") {
    std::vector<double> times;
    std::vector<bool> events;
    for (int i = 0; i < 20; ++i) {
      times.push_back(i + 1.0);
      events.push_back(true);
    }
    const auto data = make_dataset(times, events);
    const auto grid = make_grid({1, 20});  // covers every observed time
    const auto curves = constant_curves(data, grid, 0.45);
    BootstrapOptions opts;
    opts.folds = 10;
    opts.seed = 5;
    const auto report = bootstrap_evaluate(curves, data, opts);
    CHECK(report.cindex.point == 0.5);
    CHECK(report.cindex.boot_mean == 0.5);
    CHECK(report.cindex.boot_std == 0.0);
    CHECK(report.cdauc.boot_std <= 1e-12);  // identical folds up to roundoff
    CHECK(report.ddc.boot_std <= 1e-12);
    CHECK(report.n_comparable_pairs == 20 * 19 / 2);
    CHECK(report.n_censored_excluded_from_ddc == 0);
  }
  SUBCASE("deterministic given the seed") {
    std::mt19937_64 rng(109);
    const auto data = random_dataset(rng, 30);
    const auto grid = make_grid({5, 10, 20, 30});
    const auto curves = random_curves(data, grid, rng);
    BootstrapOptions opts;
    opts.folds = 10;
    opts.seed = 17;
    const auto a = bootstrap_evaluate(curves, data, opts);
    const auto b = bootstrap_evaluate(curves, data, opts);
    CHECK(a.cindex.boot_mean == b.cindex.boot_mean);
    CHECK(a.cindex.boot_std == b.cindex.boot_std);
    CHECK(a.cdauc.boot_mean == b.cdauc.boot_mean);
    CHECK(a.ddc.boot_mean == b.ddc.boot_mean);
  }
  SUBCASE("two folds replayed from the documented stream") {
    const auto data = make_dataset({1, 2, 3, 4, 5, 6}, {true, true, false, true, true, false});
    const auto grid = make_grid({2, 4, 6});
    std::mt19937_64 curve_rng(7);
    const auto curves = random_curves(data, grid, curve_rng);
    BootstrapOptions opts;
    opts.folds = 2;
    opts.seed = 23;
    const auto report = bootstrap_evaluate(curves, data, opts);

    std::mt19937_64 rng(23);
    std::vector<double> values;
    for (int fold = 0; fold < 2; ++fold) {
      SurvivalDataset sample;
      std::vector<SurvivalCurve> sample_curves;
      for (std::size_t k = 0; k < data.size(); ++k) {
        const auto idx = static_cast<std::size_t>(rng() % data.size());
        sample.records.push_back(data.records[idx]);
        sample_curves.push_back(curves[idx]);
      }
      values.push_back(cindex_td(sample_curves, sample));
    }
    CHECK(report.cindex.boot_mean == doctest::Approx(0.5 * (values[0] + values[1])));
  }
  SUBCASE("degenerate folds are excluded and counted") {
    // Full-sample metrics are all defined, but a resample that misses the
    // only event at t=3 loses its second AUC time and is excluded there.
    const auto data = make_dataset({1, 1, 2, 3, 4, 5}, {true, true, false, true, false, false});
    const auto grid = make_grid({1, 3, 5});
    std::mt19937_64 rng(3);
    const auto curves = random_curves(data, grid, rng);
    BootstrapOptions opts;
    opts.folds = 30;
    opts.seed = 11;
    const auto report = bootstrap_evaluate(curves, data, opts);
    CHECK(report.cdauc.excluded_folds > 0);
    CHECK(report.cdauc.excluded_folds < 30);
  }
  SUBCASE("report serializes with stable keys") {
    const auto data = make_dataset({1, 2, 3, 4}, {true, true, false, true});
    const auto grid = make_grid({2, 4});
    const auto curves = oracle_curves(data, grid);
    BootstrapOptions opts;
    opts.folds = 3;
    const auto text = bootstrap_evaluate(curves, data, opts).to_json();
    for (const char* key :
         {"cindex_td", "cdauc", "ddc", "bootstrap_mean", "bootstrap_std", "value",
          "n_comparable_pairs", "ddc_excluded_censored", "bootstrap_folds", "seed"})
      CHECK(text.find(key) != std::string::npos);
  }
}
