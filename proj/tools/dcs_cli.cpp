// Command-line front end: synthetic data generation, training, evaluation,
// comparison-count analytics and grid histograms. Every command is
// deterministic given its flags; reruns produce byte-identical outputs.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcs/config_json.hpp"
#include "dcs/core.hpp"
#include "dcs/data.hpp"
#include "dcs/grids.hpp"
#include "dcs/losses.hpp"
#include "dcs/metrics.hpp"
#include "dcs/model.hpp"
#include "dcs/model_io.hpp"
#include "dcs/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Every persisted output gets a sidecar recording the exact invocation, so a
// run can be reproduced from its artifacts alone.
void write_invocation_meta(const fs::path& output, const json& invocation) {
  write_text(output.string() + ".meta.json", invocation.dump(2) + "\n");
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
  std::size_t n = 1000;
  double censoring = 0.3;
  std::uint64_t seed = 1;
  std::string distribution = "uniform";
  std::string censoring_mode = "flip";
  std::size_t noise_features = 2;
  std::string output = "synthetic.csv";
};

dcs::SyntheticSpec to_spec(const SynthArgs& args) {
  dcs::SyntheticSpec spec;
  spec.n = args.n;
  spec.censoring_rate = args.censoring;
  spec.seed = args.seed;
  spec.noise_features = args.noise_features;
  if (args.distribution == "uniform")
    spec.distribution = dcs::TimeDistribution::Uniform;
  else if (args.distribution == "clusters")
    spec.distribution = dcs::TimeDistribution::WeibullClusters;
  else
    throw std::runtime_error("unknown distribution '" + args.distribution + "'");
  if (args.censoring_mode == "flip")
    spec.censoring = dcs::CensoringMode::IndependentFlip;
  else if (args.censoring_mode == "competing")
    spec.censoring = dcs::CensoringMode::CompetingLate;
  else
    throw std::runtime_error("unknown censoring mode '" + args.censoring_mode + "'");
  return spec;
}

int cmd_synth(const SynthArgs& args) {
  const dcs::SurvivalDataset data = dcs::generate_synthetic(to_spec(args));
  dcs::write_csv(args.output, data);
  write_invocation_meta(args.output,
                        json{{"command", "synth"},
                             {"n", args.n},
                             {"censoring", args.censoring},
                             {"seed", args.seed},
                             {"distribution", args.distribution},
                             {"censoring_mode", args.censoring_mode},
                             {"noise_features", args.noise_features}});
  std::cout << "wrote " << args.output << " (" << data.size() << " records, "
            << data.num_events() << " events)\n";
  return 0;
}

// ---------------------------------------------------------------- train ----

struct RunConfig {
  std::uint64_t seed = 1;
  fs::path data_path;
  std::optional<double> test_fraction;
  dcs::DatasetSchema schema;
  dcs::ModelConfig model;
  dcs::TrainConfig train;
  std::size_t bootstrap_folds = 10;
  std::optional<double> tau1, tau2;
  std::size_t ddc_bins = 10;
  bool ipcw_weighting = false;  // reserved; must stay false
  fs::path output_dir = "out";
};

RunConfig parse_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config " + path.string() + ": " + std::string(e.what()));
  }

  RunConfig cfg;
  std::vector<std::string> errors;
  const auto attempt = [&](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      errors.push_back(what + ": " + e.what());
    }
  };

  attempt("seed", [&] {
    if (j.contains("seed")) j.at("seed").get_to(cfg.seed);
  });
  attempt("data", [&] {
    const auto& d = j.at("data");
    cfg.data_path = d.at("path").get<std::string>();
    d.at("schema").get_to(cfg.schema);
    if (d.contains("test_fraction") && !d.at("test_fraction").is_null()) {
      cfg.test_fraction = d.at("test_fraction").get<double>();
      if (!(*cfg.test_fraction > 0.0 && *cfg.test_fraction < 1.0))
        throw std::runtime_error("test_fraction must lie in (0,1)");
    }
  });
  attempt("model", [&] {
    if (j.contains("model")) j.at("model").get_to(cfg.model);
    cfg.model.seed = cfg.seed;
    cfg.model.validate();
  });
  attempt("train", [&] {
    if (j.contains("train")) j.at("train").get_to(cfg.train);
    cfg.train.validate();
  });
  attempt("metrics", [&] {
    if (!j.contains("metrics")) return;
    const auto& m = j.at("metrics");
    if (m.contains("bootstrap_folds")) m.at("bootstrap_folds").get_to(cfg.bootstrap_folds);
    if (cfg.bootstrap_folds < 2) throw std::runtime_error("bootstrap_folds must be at least 2");
    if (m.contains("tau1") && !m.at("tau1").is_null()) cfg.tau1 = m.at("tau1").get<double>();
    if (m.contains("tau2") && !m.at("tau2").is_null()) cfg.tau2 = m.at("tau2").get<double>();
    if (m.contains("ddc_bins")) m.at("ddc_bins").get_to(cfg.ddc_bins);
    if (m.contains("ipcw_weighting")) m.at("ipcw_weighting").get_to(cfg.ipcw_weighting);
    if (cfg.ipcw_weighting)
      throw std::runtime_error("ipcw_weighting is reserved and must be false");
  });
  attempt("output_dir", [&] {
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  });
  attempt("data.path", [&] {
    if (!cfg.data_path.empty() && !fs::exists(cfg.data_path))
      throw std::runtime_error("file not found: " + cfg.data_path.string());
  });

  if (!errors.empty()) {
    std::string all = "invalid config:";
    for (const auto& e : errors) all += "\n  - " + e;
    throw std::runtime_error(all);
  }
  return cfg;
}

// Raw-table stratified split on the event column; same stream layout as the
// dataset-level splitter (events shuffled first, then censored).
std::pair<dcs::RawTable, dcs::RawTable> split_raw_table(const dcs::RawTable& table,
                                                        const std::string& event_column,
                                                        double test_fraction,
                                                        std::uint64_t seed) {
  const auto event_idx = table.column_index(event_column);
  if (!event_idx) throw std::runtime_error("missing event column '" + event_column + "'");
  std::vector<std::size_t> events, censored;
  for (std::size_t i = 0; i < table.size(); ++i)
    (table.rows[i][*event_idx] == "1" ? events : censored).push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<bool> in_test(table.size(), false);
  std::size_t n_test = 0;
  for (auto* stratum : {&events, &censored}) {
    if (stratum->empty()) continue;
    dcs::shuffle_inplace(*stratum, rng);
    const auto take = static_cast<std::size_t>(
        std::llround(static_cast<double>(stratum->size()) * test_fraction));
    for (std::size_t k = 0; k < take; ++k) in_test[(*stratum)[k]] = true;
    n_test += take;
  }
  if (n_test == 0 || n_test == table.size())
    throw std::runtime_error("too few records to split");

  dcs::RawTable train, test;
  train.columns = table.columns;
  test.columns = table.columns;
  for (std::size_t i = 0; i < table.size(); ++i)
    (in_test[i] ? test : train).rows.push_back(table.rows[i]);
  return {std::move(train), std::move(test)};
}

void write_raw_csv(const fs::path& path, const dcs::RawTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << table.columns[c] << (c + 1 < table.columns.size() ? ',' : '\n');
  for (const auto& row : table.rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      out << row[c] << (c + 1 < row.size() ? ',' : '\n');
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

int cmd_train(const fs::path& config_path) {
  const RunConfig cfg = parse_run_config(config_path);
  fs::create_directories(cfg.output_dir);

  dcs::RawTable table = dcs::load_csv(cfg.data_path, cfg.schema);
  if (cfg.test_fraction) {
    auto [train_part, test_part] =
        split_raw_table(table, cfg.schema.event_column, *cfg.test_fraction, cfg.seed + 17);
    write_raw_csv(cfg.output_dir / "test.csv", test_part);
    table = std::move(train_part);
  }

  const dcs::PreprocessStats stats = dcs::fit_preprocess(table, cfg.schema);
  const dcs::SurvivalDataset data = dcs::apply_preprocess(table, stats);

  dcs::TrainResult result = dcs::train(data, cfg.model, cfg.train);
  result.model.preprocess = stats;

  save_model(cfg.output_dir / "checkpoint.bin", cfg.output_dir / "manifest.json", result.model);

  std::string log_csv = "epoch,train_loss,val_loss\n";
  for (const auto& entry : result.log)
    log_csv += std::to_string(entry.epoch) + "," + format_double(entry.train_loss) + "," +
               format_double(entry.val_loss) + "\n";
  write_text(cfg.output_dir / "training_log.csv", log_csv);

  // verbatim copy of the config for provenance
  std::ifstream original(config_path, std::ios::binary);
  std::stringstream buffer;
  buffer << original.rdbuf();
  write_text(cfg.output_dir / "config.json", buffer.str());

  std::cout << "trained on " << data.size() << " records, " << result.log.size()
            << " epochs (best " << result.best_epoch << ", val loss "
            << format_double(result.best_val_loss) << ")\n"
            << "checkpoint " << (cfg.output_dir / "checkpoint.bin").string() << "\n";
  return 0;
}

// ------------------------------------------------------------- evaluate ----

int cmd_evaluate(const fs::path& checkpoint, const fs::path& manifest, const fs::path& data_path,
                 const fs::path& output, std::size_t folds, std::uint64_t seed,
                 std::optional<double> tau1, std::optional<double> tau2, std::size_t ddc_bins,
                 const std::string& debug_curves, const std::string& time_column,
                 const std::string& event_column, std::size_t debug_nodes) {
  dcs::BootstrapOptions opts;
  opts.folds = folds;
  opts.seed = seed;
  opts.cdauc.tau1 = tau1;
  opts.cdauc.tau2 = tau2;
  opts.ddc_bins = ddc_bins;

  dcs::EvaluationReport report;
  if (!debug_curves.empty()) {
    dcs::DatasetSchema schema;
    schema.time_column = time_column;
    schema.event_column = event_column;
    const dcs::RawTable table = dcs::load_csv(data_path, schema);
    const auto time_idx = *table.column_index(time_column);
    const auto event_idx = *table.column_index(event_column);
    dcs::SurvivalDataset data;
    for (const auto& row : table.rows)
      data.records.push_back({{}, std::stod(row[time_idx]), row[event_idx] == "1"});

    dcs::GridSpec spec{dcs::GridSpacing::Linear, debug_nodes, std::nullopt, std::nullopt};
    const auto grid = std::make_shared<dcs::TimeGrid>(dcs::build_grid(spec, data));
    std::vector<dcs::SurvivalCurve> curves;
    for (const auto& rec : data.records) {
      std::vector<double> values;
      for (double t : grid->nodes)
        values.push_back(debug_curves == "oracle" ? std::exp(-t / rec.time) : 0.5);
      curves.push_back({grid, values});
    }
    report = dcs::bootstrap_evaluate(curves, data, opts);
  } else {
    const dcs::TrainedModel model = dcs::load_model(checkpoint, manifest);
    if (!model.preprocess)
      throw std::runtime_error("manifest carries no preprocessing statistics");
    dcs::DatasetSchema schema;
    schema.time_column = model.preprocess->time_column;
    schema.event_column = model.preprocess->event_column;
    schema.zero_as_missing_columns = model.preprocess->zero_as_missing_columns;
    const dcs::RawTable table = dcs::load_csv(data_path, schema);

    std::vector<std::string> missing;
    for (const auto& c : model.preprocess->numeric)
      if (!table.column_index(c.name)) missing.push_back(c.name);
    for (const auto& c : model.preprocess->categorical)
      if (!table.column_index(c.name)) missing.push_back(c.name);
    if (!missing.empty()) {
      std::string msg = "test data is missing trained columns:";
      for (const auto& m : missing) msg += " " + m;
      throw std::runtime_error(msg);
    }

    const dcs::SurvivalDataset data = dcs::apply_preprocess(table, *model.preprocess);
    report = dcs::bootstrap_evaluate(model, data, opts);
  }

  const std::string text = report.to_json();
  if (!output.empty()) {
    write_text(output, text);
    json meta{{"command", "evaluate"},
              {"checkpoint", checkpoint.string()},
              {"manifest", manifest.string()},
              {"data", data_path.string()},
              {"folds", folds},
              {"seed", seed},
              {"ddc_bins", ddc_bins}};
    meta["tau1"] = tau1 ? json(*tau1) : json(nullptr);
    meta["tau2"] = tau2 ? json(*tau2) : json(nullptr);
    if (!debug_curves.empty()) meta["debug"] = debug_curves;
    write_invocation_meta(output, meta);
  }
  std::cout << text;
  return 0;
}

// -------------------------------------------------------- compare-counts ----

int cmd_compare_counts(const fs::path& data_path, const std::string& time_column,
                       const std::string& event_column, const std::string& sweep, std::size_t n,
                       std::uint64_t seed, const std::string& censoring_mode,
                       const fs::path& output) {
  if (!sweep.empty()) {
    std::vector<double> rates;
    std::stringstream ss(sweep);
    std::string token;
    while (std::getline(ss, token, ',')) rates.push_back(std::stod(token));

    std::string csv =
        "censoring_requested,censoring_observed,n,count_a,count_b,"
        "a_over_n2,b_over_n2,estimate_a,estimate_b,f_observed,f_estimated\n";
    for (std::size_t k = 0; k < rates.size(); ++k) {
      SynthArgs args;
      args.n = n;
      args.censoring = rates[k];
      args.seed = seed + 1000 * k;  // one independent stream per point
      args.censoring_mode = censoring_mode;
      args.noise_features = 0;
      const auto data = dcs::generate_synthetic(to_spec(args));
      const auto f = dcs::comparison_factor(data);
      const double nd = static_cast<double>(n);
      csv += format_double(rates[k]) + "," + format_double(f.censoring_rate) + "," +
             std::to_string(n) + "," + std::to_string(f.count_events_only) + "," +
             std::to_string(f.count_events_and_cens) + "," +
             format_double(static_cast<double>(f.count_events_only) / (nd * nd)) + "," +
             format_double(static_cast<double>(f.count_events_and_cens) / (nd * nd)) + "," +
             format_double(
                 dcs::estimate_comparison_probability(rates[k], dcs::KernelPairs::EventsOnly)) +
             "," +
             format_double(dcs::estimate_comparison_probability(
                 rates[k], dcs::KernelPairs::EventsAndCensored)) +
             "," + (f.f_observed ? format_double(*f.f_observed) : "") + "," +
             format_double(f.f_estimated) + "\n";
    }
    if (!output.empty()) {
      write_text(output, csv);
      write_invocation_meta(output, json{{"command", "compare-counts"},
                                         {"sweep", sweep},
                                         {"n", n},
                                         {"seed", seed},
                                         {"censoring_mode", censoring_mode}});
    }
    std::cout << csv;
    return 0;
  }

  if (data_path.empty()) throw std::runtime_error("need --data or --sweep");
  dcs::DatasetSchema schema;
  schema.time_column = time_column;
  schema.event_column = event_column;
  const dcs::RawTable table = dcs::load_csv(data_path, schema);
  const auto time_idx = *table.column_index(time_column);
  const auto event_idx = *table.column_index(event_column);
  dcs::SurvivalDataset data;
  for (const auto& row : table.rows)
    data.records.push_back({{}, std::stod(row[time_idx]), row[event_idx] == "1"});

  const auto f = dcs::comparison_factor(data);
  json j;
  j["n"] = data.size();
  j["censoring_rate"] = f.censoring_rate;
  j["count_a"] = f.count_events_only;
  j["count_b"] = f.count_events_and_cens;
  j["f_observed"] = f.f_observed ? json(*f.f_observed) : json(nullptr);
  j["f_estimated"] = f.f_estimated;
  const std::string text = j.dump(2) + "\n";
  if (!output.empty()) {
    write_text(output, text);
    write_invocation_meta(output, json{{"command", "compare-counts"},
                                       {"data", data_path.string()},
                                       {"time_column", time_column},
                                       {"event_column", event_column}});
  }
  std::cout << text;
  return 0;
}

// ------------------------------------------------------------ grid-info ----

int cmd_grid_info(const fs::path& data_path, const std::string& time_column,
                  const std::string& event_column, std::size_t nodes, const fs::path& output) {
  dcs::DatasetSchema schema;
  schema.time_column = time_column;
  schema.event_column = event_column;
  const dcs::RawTable table = dcs::load_csv(data_path, schema);
  if (table.rows.empty()) throw std::runtime_error("empty dataset");
  const auto time_idx = *table.column_index(time_column);
  const auto event_idx = *table.column_index(event_column);
  dcs::SurvivalDataset data;
  for (const auto& row : table.rows)
    data.records.push_back({{}, std::stod(row[time_idx]), row[event_idx] == "1"});

  std::string csv = "spacing,node_index,node_time,events,censorings\n";
  for (auto spacing :
       {dcs::GridSpacing::Linear, dcs::GridSpacing::Logarithmic, dcs::GridSpacing::Quantile}) {
    dcs::GridSpec spec{spacing, nodes, std::nullopt, std::nullopt};
    const dcs::TimeGrid grid = dcs::build_grid(spec, data);
    const auto counts = dcs::event_histogram(data, grid);
    for (std::size_t l = 0; l < grid.size(); ++l)
      csv += dcs::spacing_name(spacing) + "," + std::to_string(l + 1) + "," +
             format_double(grid.nodes[l]) + "," + std::to_string(counts[l].events) + "," +
             std::to_string(counts[l].censorings) + "\n";
  }
  if (!output.empty()) write_text(output, csv);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-time survival prediction toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  synth_cmd->add_option("--n", synth.n, "number of records");
  synth_cmd->add_option("--censoring", synth.censoring, "censoring rate in [0,1)");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--distribution", synth.distribution, "uniform | clusters");
  synth_cmd->add_option("--censoring-mode", synth.censoring_mode, "flip | competing");
  synth_cmd->add_option("--noise-features", synth.noise_features, "noise covariate count");
  synth_cmd->add_option("--output", synth.output, "output CSV path");

  fs::path config_path;
  auto* train_cmd = app.add_subcommand("train", "train a model from a JSON config");
  train_cmd->add_option("--config", config_path, "run configuration file")->required();

  fs::path eval_ckpt, eval_manifest, eval_data, eval_output;
  std::size_t eval_folds = 10, eval_ddc_bins = 10, eval_debug_nodes = 10;
  std::uint64_t eval_seed = 1;
  double eval_tau1 = -1, eval_tau2 = -1;
  bool debug_oracle = false, debug_constant = false;
  std::string eval_time = "time", eval_event = "event";
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a test CSV");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "parameter checkpoint");
  eval_cmd->add_option("--manifest", eval_manifest, "model manifest");
  eval_cmd->add_option("--data", eval_data, "test CSV")->required();
  eval_cmd->add_option("--output", eval_output, "report JSON path");
  eval_cmd->add_option("--folds", eval_folds, "bootstrap folds");
  eval_cmd->add_option("--seed", eval_seed, "bootstrap seed");
  eval_cmd->add_option("--tau1", eval_tau1, "integration window start");
  eval_cmd->add_option("--tau2", eval_tau2, "integration window end");
  eval_cmd->add_option("--ddc-bins", eval_ddc_bins, "calibration bins");
  eval_cmd->add_flag("--debug-oracle", debug_oracle,
                     "replace predictions with time-ordered oracle curves");
  eval_cmd->add_flag("--debug-constant", debug_constant,
                     "replace predictions with one constant curve");
  eval_cmd->add_option("--time-column", eval_time, "time column (debug modes)");
  eval_cmd->add_option("--event-column", eval_event, "event column (debug modes)");
  eval_cmd->add_option("--debug-nodes", eval_debug_nodes, "grid size (debug modes)");

  fs::path cc_data, cc_output;
  std::string cc_time = "time", cc_event = "event", cc_sweep, cc_mode = "flip";
  std::size_t cc_n = 10000;
  std::uint64_t cc_seed = 1;
  auto* cc_cmd = app.add_subcommand("compare-counts", "pairwise comparison analytics");
  cc_cmd->add_option("--data", cc_data, "dataset CSV");
  cc_cmd->add_option("--time-column", cc_time, "time column");
  cc_cmd->add_option("--event-column", cc_event, "event column");
  cc_cmd->add_option("--sweep", cc_sweep, "comma-separated censoring rates");
  cc_cmd->add_option("--n", cc_n, "records per sweep point");
  cc_cmd->add_option("--seed", cc_seed, "sweep base seed");
  cc_cmd->add_option("--censoring-mode", cc_mode, "flip | competing");
  cc_cmd->add_option("--output", cc_output, "output path");

  fs::path gi_data, gi_output;
  std::string gi_time = "time", gi_event = "event";
  std::size_t gi_nodes = 10;
  auto* gi_cmd = app.add_subcommand("grid-info", "per-node event histograms for all spacings");
  gi_cmd->add_option("--data", gi_data, "dataset CSV")->required();
  gi_cmd->add_option("--time-column", gi_time, "time column");
  gi_cmd->add_option("--event-column", gi_event, "event column");
  gi_cmd->add_option("--nodes", gi_nodes, "grid size");
  gi_cmd->add_option("--output", gi_output, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (train_cmd->parsed()) return cmd_train(config_path);
    if (eval_cmd->parsed()) {
      if (debug_oracle && debug_constant)
        throw std::runtime_error("choose at most one debug mode");
      const std::string debug = debug_oracle ? "oracle" : debug_constant ? "constant" : "";
      if (debug.empty() && (eval_ckpt.empty() || eval_manifest.empty()))
        throw std::runtime_error("--checkpoint and --manifest are required without debug mode");
      return cmd_evaluate(eval_ckpt, eval_manifest, eval_data, eval_output, eval_folds,
                          eval_seed,
                          eval_tau1 >= 0 ? std::optional<double>(eval_tau1) : std::nullopt,
                          eval_tau2 >= 0 ? std::optional<double>(eval_tau2) : std::nullopt,
                          eval_ddc_bins, debug, eval_time, eval_event, eval_debug_nodes);
    }
    if (cc_cmd->parsed())
      return cmd_compare_counts(cc_data, cc_time, cc_event, cc_sweep, cc_n, cc_seed, cc_mode,
                                cc_output);
    if (gi_cmd->parsed())
      return cmd_grid_info(gi_data, gi_time, gi_event, gi_nodes, gi_output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
