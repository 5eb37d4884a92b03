#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace vrnbw::cli {

enum class Mode { Simulate, Localize, AlphaSweep, Flow, Equilibria, Stability, TaylorCheck, PathBound };
enum class Format { Csv, Json };

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

struct ExperimentConfig {
  Mode mode = Mode::Localize;
  std::vector<double> alphas{2.0};
  int n = 6;
  std::int64_t steps = 100000;
  std::int64_t runs = 10;
  std::int64_t window = 0;          // 0: max(10 N, 500)
  std::uint64_t seed = 1;
  int threads = 0;
  std::int64_t record_every = 0;    // simulate: snapshot stride, 0 = steps / 100
  std::vector<double> init;         // flow: starting measure, empty = random from seed
  double dt = 1e-2;
  double max_time = 50.0;
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
  std::int64_t k_max = 1000000;
  int loops = 50;
  std::filesystem::path out_dir = ".";
  Format format = Format::Csv;

  nlohmann::json to_json() const;
};

// Applies keys from a JSON object on top of `base`.  Unknown keys and
// wrong types raise ConfigError.
ExperimentConfig merge_config(ExperimentConfig base, const nlohmann::json& j);
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});
void validate(const ExperimentConfig& config);

// Output directory used when none is given: $VRNBW_OUTPUT_DIR or ".".
std::filesystem::path default_output_dir();

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

std::string format_double(double x);

struct ExperimentResult {
  std::vector<Table> tables;
  nlohmann::json summary;
  std::vector<std::filesystem::path> files;  // written outputs, manifest last
};

// Runs the mode, writes one file per table plus manifest.json.
ExperimentResult run_experiment(const ExperimentConfig& config);
// Same without touching the filesystem.
ExperimentResult compute_experiment(const ExperimentConfig& config);

}  // namespace vrnbw::cli
