#include "dcs/model_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dcs/config_json.hpp"

namespace dcs {

namespace {

constexpr char kMagic[8] = {'D', 'C', 'S', 'P', 'A', 'R', 'A', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_parameters(const std::filesystem::path& path, const nn::ParameterSet& params) {
  for (const auto& p : params)
    for (double v : p.value.values)
      if (!std::isfinite(v))
        throw std::runtime_error("checkpoint: non-finite value in parameter '" + p.name + "'");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    write_pod(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_pod(out, static_cast<std::uint32_t>(p.value.shape.size()));
    for (std::size_t d : p.value.shape) write_pod(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(p.value.values.data()),
              static_cast<std::streamsize>(p.value.values.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

nn::ParameterSet load_parameters(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path.string() + ": not a parameter checkpoint");
  if (read_pod<std::uint32_t>(in) != kVersion)
    throw std::runtime_error(path.string() + ": unsupported checkpoint version");

  nn::ParameterSet params;
  const auto count = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = read_pod<std::uint32_t>(in);
    if (rank != 2) throw std::runtime_error(path.string() + ": unexpected tensor rank");
    const auto rows = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
    const auto cols = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
    nn::Tensor t(rows, cols);
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path.string() + ": truncated file");
    params.add(std::move(name), std::move(t));
  }
  return params;
}

void save_model(const std::filesystem::path& checkpoint_path,
                const std::filesystem::path& manifest_path, const TrainedModel& model) {
  save_parameters(checkpoint_path, model.params);

  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["model"] = model.config;
  manifest["config_hash"] = config_hash(nlohmann::json(model.config));
  manifest["grid"] = {{"spacing", spacing_name(model.grid.spacing)},
                      {"nodes", model.grid.nodes}};
  manifest["feature_names"] = model.feature_names;
  manifest["preprocess"] =
      model.preprocess ? nlohmann::json(*model.preprocess) : nlohmann::json(nullptr);

  std::ofstream out(manifest_path);
  if (!out) throw std::runtime_error("cannot write " + manifest_path.string());
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + manifest_path.string());
}

TrainedModel load_model(const std::filesystem::path& checkpoint_path,
                        const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  in >> manifest;
  if (manifest.at("format_version").get<int>() != 1)
    throw std::runtime_error(manifest_path.string() + ": unsupported manifest version");

  TrainedModel model;
  manifest.at("model").get_to(model.config);
  model.grid.spacing = spacing_from_name(manifest.at("grid").at("spacing").get<std::string>());
  manifest.at("grid").at("nodes").get_to(model.grid.nodes);
  manifest.at("feature_names").get_to(model.feature_names);
  if (!manifest.at("preprocess").is_null())
    model.preprocess = manifest.at("preprocess").get<PreprocessStats>();

  model.params = load_parameters(checkpoint_path);
  // Validate against the configured architecture.
  DcsNetwork net(model.config, model.feature_names.size(), model.params);
  model.params = net.params();
  return model;
}

}  // namespace dcs
