#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace pulsekit {

/// Model parameters arrive untyped from the config file; each imputer
/// interprets its own keys.
using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

enum class DataFormat { Csv, RawF32, Jsonl, Synthetic };
enum class Normalization { None, ZScore };

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  bool operator==(const SplitFractions&) const = default;
};

struct MissingnessSpec {
  std::string type = "extended";
  double percent = 0.0;
  std::int64_t max_gap = 50;
  std::optional<std::string> pattern_path;
  bool per_channel = false;
  /// Falls back to DataConfig::seed when absent.
  std::optional<std::uint64_t> seed;

  bool operator==(const MissingnessSpec&) const = default;
};

/// Optional knobs for the built-in synthetic datasets. Unset fields take the
/// dataset's defaults.
struct SyntheticOverrides {
  std::optional<std::int64_t> n_samples;
  std::optional<double> pulse_rate_hz;
  std::optional<double> rate_jitter;
  std::optional<double> pulse_width_s;
  std::optional<double> baseline_freq_hz;
  std::optional<double> baseline_amplitude;
  std::optional<double> noise_std;

  bool operator==(const SyntheticOverrides&) const = default;
};

struct DataConfig {
  std::string dataset_name;
  std::optional<std::string> path;
  DataFormat format = DataFormat::Synthetic;
  std::int64_t channels = 1;
  double sampling_rate_hz = 100.0;
  std::int64_t window_length = 1000;
  Normalization normalization = Normalization::ZScore;
  SplitFractions split;
  MissingnessSpec missingness;
  std::uint64_t seed = 0;
  SyntheticOverrides synthetic;

  std::uint64_t missingness_seed() const { return missingness.seed.value_or(seed); }

  bool operator==(const DataConfig&) const = default;
};

struct ModelConfig {
  std::string name;
  ParamMap params;

  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  bool enabled = false;
  std::int64_t batch_size = 32;
  std::int64_t epochs = 0;

  bool operator==(const TrainConfig&) const = default;
};

struct ExperimentConfig {
  std::string experiment_name;
  DataConfig data;
  ModelConfig model;
  TrainConfig train;

  bool operator==(const ExperimentConfig&) const = default;
};

std::string_view to_string(DataFormat format);
std::string_view to_string(Normalization normalization);

}  // namespace pulsekit
