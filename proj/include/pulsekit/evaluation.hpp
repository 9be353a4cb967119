#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pulsekit/error.hpp"
#include "pulsekit/signal.hpp"

namespace pulsekit::evaluation {

struct MetricValue {
  double value = 0.0;
  Eigen::Index n_missing = 0;
};

namespace detail {

template <typename Truth, typename Imputed, typename Missing, typename Reduce>
MetricValue masked_mean(const Eigen::DenseBase<Truth>& truth,
                        const Eigen::DenseBase<Imputed>& imputed,
                        const Eigen::DenseBase<Missing>& missing, Reduce reduce) {
  if (truth.rows() != imputed.rows() || truth.cols() != imputed.cols() ||
      truth.rows() != missing.rows() || truth.cols() != missing.cols()) {
    throw Error(ErrorKind::InvalidValue, "truth, imputation and mask shapes differ");
  }
  // Fixed-size row-vector masks do not mix with dynamic operands in select().
  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> miss = missing.derived();
  const Eigen::Index n = miss.count();
  if (n == 0) throw Error(ErrorKind::EmptyMask, "no missing positions to score");
  const Eigen::ArrayXXd diff = truth.derived().array() - imputed.derived().array();
  // select() keeps observed positions out of the sum entirely, even if they hold inf.
  const double total = miss.select(reduce(diff), 0.0).sum();
  return {total / static_cast<double>(n), n};
}

}  // namespace detail

/// Mean squared error over missing positions only.
template <typename Truth, typename Imputed, typename Missing>
MetricValue mse_missing(const Eigen::DenseBase<Truth>& truth,
                        const Eigen::DenseBase<Imputed>& imputed,
                        const Eigen::DenseBase<Missing>& missing) {
  return detail::masked_mean(truth, imputed, missing, [](const auto& d) { return d.square(); });
}

/// Mean absolute error over missing positions only.
template <typename Truth, typename Imputed, typename Missing>
MetricValue mae_missing(const Eigen::DenseBase<Truth>& truth,
                        const Eigen::DenseBase<Imputed>& imputed,
                        const Eigen::DenseBase<Missing>& missing) {
  return detail::masked_mean(truth, imputed, missing, [](const auto& d) { return d.abs(); });
}

inline MetricValue mse_missing(const Sample& truth, const Sample& imputed, const Mask& mask) {
  return mse_missing(truth.values, imputed.values, mask.missing);
}

inline MetricValue mae_missing(const Sample& truth, const Sample& imputed, const Mask& mask) {
  return mae_missing(truth.values, imputed.values, mask.missing);
}

struct SampleScore {
  std::string sample_id;
  double mse = 0.0;
  double mae = 0.0;
  std::int64_t n_missing = 0;
};

SampleScore score_sample(const Sample& truth, const Sample& imputed, const Mask& mask);

struct Aggregate {
  double mse = 0.0;
  double mae = 0.0;
  std::int64_t n_missing = 0;
};

struct EvaluationReport {
  std::string experiment_name;
  std::string model_name;
  std::int64_t n_samples = 0;
  std::vector<SampleScore> per_sample;
  Aggregate aggregate;
  std::string config_digest;
  std::uint64_t seed = 0;
};

struct ReportHeader {
  std::string experiment_name;
  std::string model_name;
  std::string config_digest;
  std::uint64_t seed = 0;
};

/// Missing-count-weighted means, summed in input order.
EvaluationReport aggregate(std::span<const SampleScore> scores, const ReportHeader& header = {});

/// Pretty-printed JSON with a fixed key order.
std::string to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

}  // namespace pulsekit::evaluation
