#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pulsekit/experiment_config.hpp"
#include "pulsekit/signal.hpp"

namespace pulsekit::dataset {

/// Pulse-train generator parameters. The pulse width is the standard
/// deviation of each Gaussian bump.
struct SyntheticParams {
  std::int64_t n_samples = 50;
  std::int64_t channels = 1;
  std::int64_t window_length = 1000;
  double sampling_rate_hz = 100.0;
  double pulse_rate_hz = 1.2;
  double rate_jitter = 0.03;
  double pulse_width_s = 0.08;
  double baseline_freq_hz = 0.1;
  double baseline_amplitude = 0.5;
  double noise_std = 0.05;
  std::uint64_t seed = 0;
};

/// Names accepted for `format: synthetic`.
bool is_builtin_synthetic(std::string_view dataset_name);

/// Defaults of a built-in synthetic dataset, with the config's shape,
/// seed and overrides applied.
SyntheticParams synthetic_params_for(const DataConfig& config);

SignalSet generate_synthetic(const SyntheticParams& params);

/// A continuous multi-channel recording before windowing.
struct Recording {
  std::string id;
  Signal values;
  MissingMatrix missing;  // empty when the source had no missing markers
};

/// Reads every recording of a dataset (file or directory) in deterministic
/// order: lexicographic by filename, then record index.
std::vector<Recording> read_recordings(const DataConfig& config);

SignalSet load_dataset(const DataConfig& config);

/// Non-overlapping windows; the trailing remainder is dropped.
std::vector<Sample> window(const Signal& continuous, Eigen::Index window_length,
                           const std::string& id_prefix = "w");

struct ChannelStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // population convention
};

struct Normalized {
  SignalSet set;
  ChannelStats stats;
};

/// Per-channel z-score across all samples. Source-missing positions are
/// excluded from the statistics and stay 0.
Normalized normalize_zscore(const SignalSet& set);

struct SplitSets {
  SignalSet train;
  SignalSet val;
  SignalSet test;
};

SplitSets split(const SignalSet& set, const SplitFractions& fractions, std::uint64_t seed);

/// Writes `<dir>/meta.json` and `<dir>/data.f32` with one record per sample.
void write_raw_f32(const SignalSet& set, const std::filesystem::path& dir);

/// `$PULSEKIT_DATA_DIR`, or `./data`.
std::filesystem::path data_root();

/// Points `config` at `<root>/<dataset_name>` and infers format, channel
/// count and sampling rate from what the directory holds.
void resolve_custom_dataset(DataConfig& config, const std::filesystem::path& root);

}  // namespace pulsekit::dataset
