#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pulsekit/evaluation.hpp"
#include "pulsekit/imputers.hpp"
#include "pulsekit/signal.hpp"

namespace pulsekit::bundle {

/// Timesteps of context stored on each side of a missing run.
inline constexpr Eigen::Index kContextMargin = 100;
inline constexpr int kBundleVersion = 1;

struct Segment {
  Eigen::Index start = 0;
  std::vector<double> values;
};

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
};

/// One channel of one sample. Multi-channel samples produce one entry per
/// channel sharing the same id.
struct BundleSample {
  std::string id;
  Eigen::Index channel = 0;
  std::vector<double> truth;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> missing_runs;  // (start, length)
  std::map<std::string, std::vector<Segment>> imputations;
  std::map<std::string, Metrics> metrics;
};

struct Bundle {
  int version = kBundleVersion;
  std::string experiment;
  std::string missingness_type;
  double missingness_percent = 0.0;
  double sampling_rate_hz = 0.0;
  std::vector<std::string> models;
  std::vector<BundleSample> samples;
};

/// One model's output over the evaluation samples.
struct ModelRun {
  std::string model;
  std::vector<imputers::ImputationResult> results;
  std::vector<evaluation::SampleScore> scores;
};

struct BundleMeta {
  std::string experiment;
  std::string missingness_type;
  double missingness_percent = 0.0;
  double sampling_rate_hz = 0.0;
};

/// Segments covering each run of `missing` widened by `margin`, clipped to
/// [0, length); overlapping windows are joined.
std::vector<std::pair<Eigen::Index, Eigen::Index>> context_windows(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& runs, Eigen::Index length,
    Eigen::Index margin = kContextMargin);

/// Throws AlignmentError unless every model covers exactly the samples of
/// `evaluated`, in any order.
Bundle export_bundle(std::span<const MaskedSample> evaluated, std::span<const ModelRun> runs,
                     const BundleMeta& meta);

/// Combines single-model bundles of one experiment into one. Throws
/// AlignmentError when sample ids or ground truth disagree.
Bundle merge_bundles(std::span<const Bundle> bundles);

std::string to_json(const Bundle& bundle);
Bundle from_json(const std::string& text);

Bundle read_bundle(const std::filesystem::path& path);
void write_bundle(const Bundle& bundle, const std::filesystem::path& path);

}  // namespace pulsekit::bundle
