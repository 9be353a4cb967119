#include "pulsekit/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace pulsekit::bundle {

namespace {

std::vector<double> to_vector(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  return {row.data(), row.data() + row.size()};
}

std::string entry_key(const BundleSample& s) { return s.id + "#" + std::to_string(s.channel); }

}  // namespace

std::vector<std::pair<Eigen::Index, Eigen::Index>> context_windows(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& runs, Eigen::Index length,
    Eigen::Index margin) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (const auto& [start, len] : runs) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, start - margin);
    const Eigen::Index hi = std::min(length, start + len + margin);
    if (!out.empty() && lo <= out.back().first + out.back().second) {
      out.back().second = std::max(out.back().first + out.back().second, hi) - out.back().first;
    } else {
      out.emplace_back(lo, hi - lo);
    }
  }
  return out;
}

Bundle export_bundle(std::span<const MaskedSample> evaluated, std::span<const ModelRun> runs,
                     const BundleMeta& meta) {
  if (runs.empty()) throw Error(ErrorKind::InvalidValue, "a bundle needs at least one model");

  Bundle bundle;
  bundle.experiment = meta.experiment;
  bundle.missingness_type = meta.missingness_type;
  bundle.missingness_percent = meta.missingness_percent;
  bundle.sampling_rate_hz = meta.sampling_rate_hz;

  std::set<std::string> expected_ids;
  for (const auto& m : evaluated) expected_ids.insert(m.id());

  // Per model: sample id -> (result, score).
  std::vector<std::unordered_map<std::string, const imputers::ImputationResult*>> results(runs.size());
  std::vector<std::unordered_map<std::string, const evaluation::SampleScore*>> scores(runs.size());
  for (std::size_t m = 0; m < runs.size(); ++m) {
    const auto& run = runs[m];
    if (std::find(bundle.models.begin(), bundle.models.end(), run.model) != bundle.models.end()) {
      throw Error(ErrorKind::AlignmentError, "model " + run.model + " appears twice");
    }
    bundle.models.push_back(run.model);
    for (const auto& r : run.results) results[m][r.sample_id] = &r;
    for (const auto& s : run.scores) scores[m][s.sample_id] = &s;
    std::set<std::string> ids;
    for (const auto& [id, _] : results[m]) ids.insert(id);
    if (ids != expected_ids || run.results.size() != evaluated.size()) {
      throw Error(ErrorKind::AlignmentError,
                  "results of model " + run.model + " do not cover exactly the evaluated samples");
    }
    for (const auto& [id, _] : scores[m]) {
      if (!expected_ids.count(id)) {
        throw Error(ErrorKind::AlignmentError, "model " + run.model + " has a score for unknown sample " + id);
      }
    }
  }

  for (const auto& masked : evaluated) {
    const Eigen::Index length = masked.ground_truth.length();
    for (Eigen::Index c = 0; c < masked.ground_truth.channels(); ++c) {
      BundleSample entry;
      entry.id = masked.id();
      entry.channel = c;
      entry.truth = to_vector(masked.ground_truth.values.row(c));
      const Eigen::Array<bool, 1, Eigen::Dynamic> row = masked.mask.missing.row(c);
      entry.missing_runs = missing_runs(row);
      const auto windows = context_windows(entry.missing_runs, length);
      for (std::size_t m = 0; m < runs.size(); ++m) {
        const auto& imputed = results[m].at(masked.id())->imputed.values;
        if (imputed.rows() != masked.ground_truth.channels() || imputed.cols() != length) {
          throw Error(ErrorKind::AlignmentError, "imputation shape of " + masked.id() + " differs from truth");
        }
        auto& segments = entry.imputations[runs[m].model];
        for (const auto& [start, len] : windows) {
          segments.push_back({start, to_vector(imputed.row(c).segment(start, len))});
        }
        if (auto it = scores[m].find(masked.id()); it != scores[m].end()) {
          entry.metrics[runs[m].model] = {it->second->mse, it->second->mae};
        }
      }
      bundle.samples.push_back(std::move(entry));
    }
  }
  return bundle;
}

Bundle merge_bundles(std::span<const Bundle> bundles) {
  if (bundles.empty()) throw Error(ErrorKind::InvalidValue, "nothing to merge");
  Bundle merged = bundles.front();
  for (std::size_t b = 1; b < bundles.size(); ++b) {
    const Bundle& other = bundles[b];
    if (other.experiment != merged.experiment || other.missingness_type != merged.missingness_type ||
        other.missingness_percent != merged.missingness_percent) {
      throw Error(ErrorKind::AlignmentError, "bundles come from different experiments");
    }
    for (const auto& model : other.models) {
      if (std::find(merged.models.begin(), merged.models.end(), model) != merged.models.end()) {
        throw Error(ErrorKind::AlignmentError, "model " + model + " appears in two bundles");
      }
      merged.models.push_back(model);
    }
    std::unordered_map<std::string, const BundleSample*> by_key;
    for (const auto& s : other.samples) by_key[entry_key(s)] = &s;
    if (by_key.size() != merged.samples.size()) {
      throw Error(ErrorKind::AlignmentError, "bundles cover different samples");
    }
    for (auto& s : merged.samples) {
      const auto it = by_key.find(entry_key(s));
      if (it == by_key.end()) throw Error(ErrorKind::AlignmentError, "sample " + s.id + " missing from a bundle");
      const BundleSample& o = *it->second;
      if (o.truth != s.truth || o.missing_runs != s.missing_runs) {
        throw Error(ErrorKind::AlignmentError, "sample " + s.id + " differs between bundles");
      }
      s.imputations.insert(o.imputations.begin(), o.imputations.end());
      s.metrics.insert(o.metrics.begin(), o.metrics.end());
    }
  }
  return merged;
}

std::string to_json(const Bundle& bundle) {
  ordered_json doc;
  doc["version"] = bundle.version;
  doc["experiment"] = bundle.experiment;
  doc["missingness"] = {{"type", bundle.missingness_type}, {"percent", bundle.missingness_percent}};
  doc["sampling_rate_hz"] = bundle.sampling_rate_hz;
  doc["models"] = bundle.models;
  auto& samples = doc["samples"] = ordered_json::array();
  for (const auto& s : bundle.samples) {
    ordered_json entry;
    entry["id"] = s.id;
    entry["channel"] = s.channel;
    entry["truth"] = s.truth;
    auto& runs = entry["missing_runs"] = ordered_json::array();
    for (const auto& [start, len] : s.missing_runs) runs.push_back({start, len});
    auto& imputations = entry["imputations"] = ordered_json::object();
    for (const auto& [model, segments] : s.imputations) {
      auto& list = imputations[model] = ordered_json::array();
      for (const auto& seg : segments) list.push_back({{"start", seg.start}, {"values", seg.values}});
    }
    auto& metrics = entry["metrics"] = ordered_json::object();
    for (const auto& [model, m] : s.metrics) metrics[model] = {{"mse", m.mse}, {"mae", m.mae}};
    samples.push_back(std::move(entry));
  }
  return doc.dump() + "\n";
}

Bundle from_json(const std::string& text) {
  try {
    const auto doc = ordered_json::parse(text);
    Bundle b;
    b.version = doc.at("version").get<int>();
    if (b.version != kBundleVersion) {
      throw Error(ErrorKind::FormatError, "unsupported bundle version " + std::to_string(b.version));
    }
    b.experiment = doc.at("experiment").get<std::string>();
    b.missingness_type = doc.at("missingness").at("type").get<std::string>();
    b.missingness_percent = doc.at("missingness").at("percent").get<double>();
    b.sampling_rate_hz = doc.at("sampling_rate_hz").get<double>();
    b.models = doc.at("models").get<std::vector<std::string>>();
    for (const auto& e : doc.at("samples")) {
      BundleSample s;
      s.id = e.at("id").get<std::string>();
      s.channel = e.value("channel", Eigen::Index{0});
      s.truth = e.at("truth").get<std::vector<double>>();
      for (const auto& run : e.at("missing_runs")) {
        s.missing_runs.emplace_back(run.at(0).get<Eigen::Index>(), run.at(1).get<Eigen::Index>());
      }
      for (const auto& [model, segments] : e.at("imputations").items()) {
        auto& list = s.imputations[model];
        for (const auto& seg : segments) {
          list.push_back({seg.at("start").get<Eigen::Index>(), seg.at("values").get<std::vector<double>>()});
        }
      }
      for (const auto& [model, m] : e.at("metrics").items()) {
        s.metrics[model] = {m.at("mse").get<double>(), m.at("mae").get<double>()};
      }
      b.samples.push_back(std::move(s));
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("bundle: ") + e.what());
  }
}

Bundle read_bundle(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void write_bundle(const Bundle& bundle, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << to_json(bundle);
}

}  // namespace pulsekit::bundle
