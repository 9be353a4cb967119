#include "pulsekit/evaluation.hpp"

#include <json.hpp>

namespace pulsekit::evaluation {

using ordered_json = nlohmann::ordered_json;

SampleScore score_sample(const Sample& truth, const Sample& imputed, const Mask& mask) {
  const auto mse = mse_missing(truth, imputed, mask);
  const auto mae = mae_missing(truth, imputed, mask);
  return {truth.id, mse.value, mae.value, mse.n_missing};
}

EvaluationReport aggregate(std::span<const SampleScore> scores, const ReportHeader& header) {
  if (scores.empty()) throw Error(ErrorKind::EmptyDataset, "no per-sample scores to aggregate");
  EvaluationReport report;
  report.experiment_name = header.experiment_name;
  report.model_name = header.model_name;
  report.config_digest = header.config_digest;
  report.seed = header.seed;
  report.per_sample.assign(scores.begin(), scores.end());
  report.n_samples = static_cast<std::int64_t>(scores.size());

  double se = 0.0;
  double ae = 0.0;
  std::int64_t n = 0;
  for (const auto& s : scores) {
    se += s.mse * static_cast<double>(s.n_missing);
    ae += s.mae * static_cast<double>(s.n_missing);
    n += s.n_missing;
  }
  if (n == 0) throw Error(ErrorKind::EmptyMask, "no missing positions across all samples");
  report.aggregate = {se / static_cast<double>(n), ae / static_cast<double>(n), n};
  return report;
}

std::string to_json(const EvaluationReport& report) {
  ordered_json doc;
  doc["experiment_name"] = report.experiment_name;
  doc["model_name"] = report.model_name;
  doc["config_digest"] = report.config_digest;
  doc["seed"] = report.seed;
  doc["n_samples"] = report.n_samples;
  doc["aggregate"] = {{"mse", report.aggregate.mse},
                      {"mae", report.aggregate.mae},
                      {"n_missing", report.aggregate.n_missing}};
  auto& per_sample = doc["per_sample"] = ordered_json::array();
  for (const auto& s : report.per_sample) {
    per_sample.push_back({{"sample_id", s.sample_id}, {"mse", s.mse}, {"mae", s.mae}, {"n_missing", s.n_missing}});
  }
  return doc.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
  try {
    const auto doc = ordered_json::parse(text);
    EvaluationReport r;
    r.experiment_name = doc.at("experiment_name").get<std::string>();
    r.model_name = doc.at("model_name").get<std::string>();
    r.config_digest = doc.at("config_digest").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.n_samples = doc.at("n_samples").get<std::int64_t>();
    const auto& agg = doc.at("aggregate");
    r.aggregate = {agg.at("mse").get<double>(), agg.at("mae").get<double>(), agg.at("n_missing").get<std::int64_t>()};
    for (const auto& s : doc.at("per_sample")) {
      r.per_sample.push_back({s.at("sample_id").get<std::string>(), s.at("mse").get<double>(),
                              s.at("mae").get<double>(), s.at("n_missing").get<std::int64_t>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("report.json: ") + e.what());
  }
}

}  // namespace pulsekit::evaluation
