#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pulsekit {

/// Channels are rows, timesteps are columns.
using Signal = Eigen::MatrixXd;
using MissingMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Sample {
  std::string id;
  Signal values;

  Eigen::Index channels() const { return values.rows(); }
  Eigen::Index length() const { return values.cols(); }
};

enum class SplitTag { Train, Val, Test, All };

struct SignalSet {
  std::vector<Sample> samples;
  double sampling_rate_hz = 0.0;
  std::vector<std::string> channel_names;
  SplitTag split_tag = SplitTag::All;
  /// Positions that were already missing in the source files (CSV empty/nan
  /// cells, JSON nulls). Empty when the source had none; otherwise aligned
  /// with `samples`. The signal itself holds 0 at those positions.
  std::vector<MissingMatrix> source_missing;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  Eigen::Index channels() const { return samples.empty() ? 0 : samples.front().channels(); }
  Eigen::Index window_length() const { return samples.empty() ? 0 : samples.front().length(); }
  bool has_source_missing() const { return !source_missing.empty(); }
};

/// true = missing.
struct Mask {
  MissingMatrix missing;

  static Mask none(Eigen::Index channels, Eigen::Index length) {
    return {MissingMatrix::Constant(channels, length, false)};
  }

  Eigen::Index channels() const { return missing.rows(); }
  Eigen::Index length() const { return missing.cols(); }
  Eigen::Index count() const { return missing.count(); }
  bool any() const { return missing.any(); }

  bool operator==(const Mask& other) const {
    return missing.rows() == other.missing.rows() && missing.cols() == other.missing.cols() &&
           (missing == other.missing).all();
  }
};

/// `observed` equals `ground_truth` where the mask is false and is 0 where it is true.
struct MaskedSample {
  Sample observed;
  Mask mask;
  Sample ground_truth;

  const std::string& id() const { return ground_truth.id; }
};

MaskedSample make_masked(const Sample& sample, Mask mask);

/// Maximal runs of `true` in one row, as (start, length) pairs.
std::vector<std::pair<Eigen::Index, Eigen::Index>> missing_runs(
    const Eigen::Ref<const Eigen::Array<bool, 1, Eigen::Dynamic>>& row);

}  // namespace pulsekit
