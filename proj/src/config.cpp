#include "pulsekit/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "pulsekit/dataset.hpp"
#include "pulsekit/imputers.hpp"
#include "pulsekit/missingness.hpp"

namespace fs = std::filesystem;

namespace pulsekit {

std::string_view to_string(DataFormat format) {
  switch (format) {
    case DataFormat::Csv: return "csv";
    case DataFormat::RawF32: return "raw-f32";
    case DataFormat::Jsonl: return "jsonl";
    case DataFormat::Synthetic: return "synthetic";
  }
  return "?";
}

std::string_view to_string(Normalization normalization) {
  return normalization == Normalization::ZScore ? "zscore" : "none";
}

}  // namespace pulsekit

namespace pulsekit::config {

namespace {

const std::set<std::string> kTopKeys = {"experiment_name", "data", "model", "train"};
const std::set<std::string> kDataKeys = {"dataset_name", "path", "format", "channels",
                                         "sampling_rate_hz", "window_length", "normalization",
                                         "split", "missingness", "seed", "synthetic"};
const std::set<std::string> kMissingnessKeys = {"type", "percent", "max_gap", "pattern_path",
                                                "per_channel", "seed"};
const std::set<std::string> kSyntheticKeys = {"n_samples", "pulse_rate_hz", "rate_jitter",
                                              "pulse_width_s", "baseline_freq_hz",
                                              "baseline_amplitude", "noise_std"};
const std::set<std::string> kSplitKeys = {"train", "val", "test"};
const std::set<std::string> kModelKeys = {"name", "params"};
const std::set<std::string> kTrainKeys = {"enabled", "batch_size", "epochs"};

/// Typed field access that records a violation and keeps the default on
/// type errors, so one pass reports every problem.
class Reader {
 public:
  Reader(std::vector<Violation>& violations, bool strict) : violations_(violations), strict_(strict) {}

  void invalid(const std::string& path, const std::string& reason) {
    violations_.push_back({ErrorKind::InvalidValue, path, reason});
  }

  bool is_map(const YAML::Node& node, const std::string& path) {
    if (node.IsMap()) return true;
    invalid(path, "must be a mapping");
    return false;
  }

  void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& prefix) {
    if (!strict_ || !node.IsMap()) return;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        violations_.push_back({ErrorKind::UnknownField, prefix.empty() ? key : prefix + "." + key,
                               "unrecognized key"});
      }
    }
  }

  template <typename T>
  void read(const YAML::Node& parent, const char* key, const std::string& path, T& out,
            const char* expected) {
    const YAML::Node node = parent[key];
    if (!node) return;
    try {
      if (!node.IsScalar()) throw YAML::BadConversion(node.Mark());
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      invalid(path, std::string("must be ") + expected);
    }
  }

  template <typename T>
  void read(const YAML::Node& parent, const char* key, const std::string& path, std::optional<T>& out,
            const char* expected) {
    if (!parent[key]) return;
    T value{};
    const std::size_t before = violations_.size();
    read(parent, key, path, value, expected);
    if (violations_.size() == before) out = value;
  }

  void read_real(const YAML::Node& parent, const char* key, const std::string& path, double& out) {
    double v = out;
    const std::size_t before = violations_.size();
    read(parent, key, path, v, "a number");
    if (violations_.size() != before) return;
    if (!std::isfinite(v)) {
      invalid(path, "must be finite");
      return;
    }
    out = v;
  }

  void read_real(const YAML::Node& parent, const char* key, const std::string& path,
                 std::optional<double>& out) {
    if (!parent[key]) return;
    double v = 0.0;
    const std::size_t before = violations_.size();
    read_real(parent, key, path, v);
    if (violations_.size() == before) out = v;
  }

 private:
  std::vector<Violation>& violations_;
  bool strict_;
};

std::optional<DataFormat> parse_format(const std::string& s) {
  if (s == "csv") return DataFormat::Csv;
  if (s == "raw-f32") return DataFormat::RawF32;
  if (s == "jsonl") return DataFormat::Jsonl;
  if (s == "synthetic") return DataFormat::Synthetic;
  return std::nullopt;
}

void read_missingness(Reader& r, const YAML::Node& node, MissingnessSpec& m) {
  const std::string p = "data.missingness";
  if (!r.is_map(node, p)) return;
  r.check_keys(node, kMissingnessKeys, p);
  r.read(node, "type", p + ".type", m.type, "a string");
  r.read_real(node, "percent", p + ".percent", m.percent);
  r.read(node, "max_gap", p + ".max_gap", m.max_gap, "an integer");
  r.read(node, "pattern_path", p + ".pattern_path", m.pattern_path, "a string");
  r.read(node, "per_channel", p + ".per_channel", m.per_channel, "a boolean");
  r.read(node, "seed", p + ".seed", m.seed, "an unsigned integer");
}

void read_split(Reader& r, const YAML::Node& node, SplitFractions& split) {
  const std::string p = "data.split";
  if (node.IsSequence()) {
    if (node.size() != 3) {
      r.invalid(p, "must list three fractions (train, val, test)");
      return;
    }
    try {
      split = {node[0].as<double>(), node[1].as<double>(), node[2].as<double>()};
    } catch (const YAML::Exception&) {
      r.invalid(p, "fractions must be numbers");
    }
    return;
  }
  if (!r.is_map(node, p)) return;
  r.check_keys(node, kSplitKeys, p);
  r.read_real(node, "train", p + ".train", split.train);
  r.read_real(node, "val", p + ".val", split.val);
  r.read_real(node, "test", p + ".test", split.test);
}

void read_data(Reader& r, const YAML::Node& node, DataConfig& d) {
  if (node.IsNull()) return;
  if (!r.is_map(node, "data")) return;
  r.check_keys(node, kDataKeys, "data");
  r.read(node, "dataset_name", "data.dataset_name", d.dataset_name, "a string");
  r.read(node, "path", "data.path", d.path, "a string");
  d.format = d.path ? DataFormat::Csv : DataFormat::Synthetic;
  if (node["format"]) {
    std::string f;
    r.read(node, "format", "data.format", f, "a string");
    if (auto parsed = parse_format(f)) {
      d.format = *parsed;
    } else if (!f.empty()) {
      r.invalid("data.format", "must be one of csv, raw-f32, jsonl, synthetic");
    }
  }
  r.read(node, "channels", "data.channels", d.channels, "an integer");
  r.read_real(node, "sampling_rate_hz", "data.sampling_rate_hz", d.sampling_rate_hz);
  r.read(node, "window_length", "data.window_length", d.window_length, "an integer");
  if (node["normalization"]) {
    std::string n;
    r.read(node, "normalization", "data.normalization", n, "a string");
    if (n == "zscore") {
      d.normalization = Normalization::ZScore;
    } else if (n == "none") {
      d.normalization = Normalization::None;
    } else if (!n.empty()) {
      r.invalid("data.normalization", "must be 'zscore' or 'none'");
    }
  }
  if (node["split"]) read_split(r, node["split"], d.split);
  if (node["missingness"]) read_missingness(r, node["missingness"], d.missingness);
  r.read(node, "seed", "data.seed", d.seed, "an unsigned integer");
  if (const auto s = node["synthetic"]; s && r.is_map(s, "data.synthetic")) {
    r.check_keys(s, kSyntheticKeys, "data.synthetic");
    auto& o = d.synthetic;
    r.read(s, "n_samples", "data.synthetic.n_samples", o.n_samples, "an integer");
    r.read_real(s, "pulse_rate_hz", "data.synthetic.pulse_rate_hz", o.pulse_rate_hz);
    r.read_real(s, "rate_jitter", "data.synthetic.rate_jitter", o.rate_jitter);
    r.read_real(s, "pulse_width_s", "data.synthetic.pulse_width_s", o.pulse_width_s);
    r.read_real(s, "baseline_freq_hz", "data.synthetic.baseline_freq_hz", o.baseline_freq_hz);
    r.read_real(s, "baseline_amplitude", "data.synthetic.baseline_amplitude", o.baseline_amplitude);
    r.read_real(s, "noise_std", "data.synthetic.noise_std", o.noise_std);
  }
}

void read_model(Reader& r, const YAML::Node& node, ModelConfig& m) {
  if (node.IsNull()) return;
  if (!r.is_map(node, "model")) return;
  r.check_keys(node, kModelKeys, "model");
  r.read(node, "name", "model.name", m.name, "a string");
  const YAML::Node params = node["params"];
  if (!params || params.IsNull()) return;
  if (!r.is_map(params, "model.params")) return;
  for (const auto& kv : params) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& value = kv.second;
    if (!value.IsScalar()) {
      r.invalid("model.params." + key, "must be a scalar");
      continue;
    }
    // Quoted scalars carry the "!" tag and always stay strings.
    double number = 0.0;
    if (value.Tag() != "!" && YAML::convert<double>::decode(value, number)) {
      m.params[key] = number;
    } else {
      m.params[key] = value.Scalar();
    }
  }
}

void read_train(Reader& r, const YAML::Node& node, TrainConfig& t) {
  if (node.IsNull()) return;
  if (!r.is_map(node, "train")) return;
  r.check_keys(node, kTrainKeys, "train");
  r.read(node, "enabled", "train.enabled", t.enabled, "a boolean");
  r.read(node, "batch_size", "train.batch_size", t.batch_size, "an integer");
  r.read(node, "epochs", "train.epochs", t.epochs, "an integer");
}

bool in_unit_interval(double f) { return f >= 0.0 && f <= 1.0; }

void validate_synthetic(const DataConfig& d, std::vector<Violation>& out) {
  const auto& o = d.synthetic;
  auto bad = [&](const char* field, const char* reason) {
    out.push_back({ErrorKind::InvalidValue, std::string("data.synthetic.") + field, reason});
  };
  if (o.n_samples && *o.n_samples < 1) bad("n_samples", "must be at least 1");
  if (o.pulse_rate_hz && !(*o.pulse_rate_hz > 0)) bad("pulse_rate_hz", "must be positive");
  if (o.rate_jitter && !(*o.rate_jitter >= 0 && *o.rate_jitter < 0.5)) bad("rate_jitter", "must lie in [0,0.5)");
  if (o.pulse_width_s && !(*o.pulse_width_s > 0)) bad("pulse_width_s", "must be positive");
  if (o.baseline_freq_hz && *o.baseline_freq_hz < 0) bad("baseline_freq_hz", "must be non-negative");
  if (o.noise_std && *o.noise_std < 0) bad("noise_std", "must be non-negative");
  if (!dataset::is_builtin_synthetic(d.dataset_name) || !(d.sampling_rate_hz > 0)) return;
  const auto p = dataset::synthetic_params_for(d);
  if (p.pulse_rate_hz > 0 && p.pulse_width_s > 0 &&
      p.sampling_rate_hz / p.pulse_rate_hz < 4.0 * p.pulse_width_s * p.sampling_rate_hz) {
    bad("pulse_width_s", "pulse period must be at least 4 pulse widths");
  }
}

void validate_missingness(const DataConfig& d, std::vector<Violation>& out) {
  const auto& m = d.missingness;
  const std::string p = "data.missingness";
  if (!missingness::Registry::instance().contains(m.type)) {
    out.push_back({ErrorKind::UnknownMissingness, m.type, "no missingness mechanism registered under this name"});
    return;
  }
  if (!(m.percent >= 0.0 && m.percent < 1.0)) {
    out.push_back({ErrorKind::InvalidValue, p + ".percent", "must lie in [0,1)"});
  } else if ((m.type == "extended" || m.type == "transient") && m.percent == 0.0) {
    out.push_back({ErrorKind::InvalidValue, p + ".percent", "must be positive for " + m.type});
  } else if (m.type != "pattern_file" && m.percent > 0.0 && d.window_length > 0 &&
             std::llround(m.percent * static_cast<double>(d.window_length)) < 1) {
    out.push_back({ErrorKind::InvalidValue, p + ".percent", "selects no timesteps at this window_length"});
  }
  if (m.max_gap < 1) out.push_back({ErrorKind::InvalidValue, p + ".max_gap", "must be at least 1"});
  if (m.type == "pattern_file" && !m.pattern_path) {
    out.push_back({ErrorKind::InvalidValue, p + ".pattern_path", "required for pattern_file"});
  }
}

void emit_real(YAML::Emitter& e, const char* key, double v) { e << YAML::Key << key << YAML::Value << v; }

template <typename T>
void emit_optional(YAML::Emitter& e, const char* key, const std::optional<T>& v) {
  if (v) e << YAML::Key << key << YAML::Value << *v;
}

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

constexpr const char* kDefaultExperiment = R"(experiment_name: default
data:
  dataset_name: synthetic_ppg
  missingness:
    type: extended
    percent: 0.1
model:
  name: fft
train:
  enabled: false
)";

}  // namespace

ParseReport check_document(const std::string& text, const ParseOptions& options) {
  ParseReport report;
  YAML::Node loaded;
  try {
    loaded = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    report.violations.push_back({ErrorKind::SyntaxError, "", e.what()});
    return report;
  }
  const YAML::Node& root = loaded;
  if (!root.IsMap()) {
    report.violations.push_back({ErrorKind::SyntaxError, "", "document must be a mapping"});
    return report;
  }

  Reader r(report.violations, options.strict);
  r.check_keys(root, kTopKeys, "");
  bool complete = true;
  for (const char* section : {"data", "model", "train"}) {
    if (!root[section]) {
      report.violations.push_back({ErrorKind::MissingSection, section, "section is required"});
      complete = false;
    }
  }

  ExperimentConfig config;
  config.experiment_name = "default";
  r.read(root, "experiment_name", "experiment_name", config.experiment_name, "a string");
  if (root["data"]) read_data(r, root["data"], config.data);
  if (root["model"]) read_model(r, root["model"], config.model);
  if (root["train"]) read_train(r, root["train"], config.train);

  if (complete) {
    // A field that already failed to read keeps its default; don't report it twice.
    std::set<std::string> reported;
    for (const auto& v : report.violations) reported.insert(v.path);
    for (auto& v : validate(config)) {
      if (!reported.count(v.path)) report.violations.push_back(std::move(v));
    }
    report.config = std::move(config);
  }
  return report;
}

std::vector<Violation> validate(const ExperimentConfig& config) {
  std::vector<Violation> out;
  auto bad = [&](const std::string& path, const std::string& reason) {
    out.push_back({ErrorKind::InvalidValue, path, reason});
  };

  static const std::regex kName("[A-Za-z0-9_\\-]+");
  if (!std::regex_match(config.experiment_name, kName)) {
    bad("experiment_name", "must match [A-Za-z0-9_-]+");
  }

  const auto& d = config.data;
  if (d.dataset_name.empty()) bad("data.dataset_name", "required");
  if (d.format == DataFormat::Synthetic) {
    if (d.path) bad("data.path", "must be absent for synthetic data");
    if (!d.dataset_name.empty() && !dataset::is_builtin_synthetic(d.dataset_name)) {
      bad("data.dataset_name", "unknown synthetic dataset (expected synthetic_ppg or synthetic_ecg)");
    }
  } else if (!d.path || d.path->empty()) {
    bad("data.path", "required for format " + std::string(to_string(d.format)));
  }
  if (d.channels < 1) bad("data.channels", "must be at least 1");
  if (!(d.sampling_rate_hz > 0)) bad("data.sampling_rate_hz", "must be positive");
  if (d.window_length < 4) bad("data.window_length", "must be at least 4");
  const auto& s = d.split;
  if (!in_unit_interval(s.train) || !in_unit_interval(s.val) || !in_unit_interval(s.test)) {
    bad("data.split", "fractions must lie in [0,1]");
  } else if (std::abs(s.train + s.val + s.test - 1.0) > 1e-9) {
    bad("data.split", "fractions must sum to 1");
  }
  validate_missingness(d, out);
  if (d.format == DataFormat::Synthetic) validate_synthetic(d, out);

  const auto& registry = imputers::Registry::instance();
  if (config.model.name.empty()) {
    bad("model.name", "required");
  } else if (!registry.contains(config.model.name)) {
    out.push_back({ErrorKind::UnknownModel, config.model.name, "no imputer registered under this name"});
  } else {
    auto params = registry.check_params(config.model.name, config.model.params);
    out.insert(out.end(), params.begin(), params.end());
    if (config.model.name == "fft" && d.window_length >= 4 && d.window_length < 8) {
      bad("data.window_length", "fft needs at least 8 timesteps");
    }
  }

  if (config.train.batch_size < 1) bad("train.batch_size", "must be at least 1");
  if (config.train.epochs < 0) bad("train.epochs", "must be non-negative");
  return out;
}

ExperimentConfig parse_config(const std::string& text, const ParseOptions& options) {
  auto report = check_document(text, options);
  if (!report.violations.empty()) throw ConfigError(std::move(report.violations));
  return std::move(*report.config);
}

ExperimentConfig load_config_file(const fs::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), options);
}

std::string to_yaml(const ExperimentConfig& config) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  const auto& d = config.data;
  e << YAML::BeginMap;
  e << YAML::Key << "experiment_name" << YAML::Value << config.experiment_name;

  e << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dataset_name" << YAML::Value << d.dataset_name;
  emit_optional(e, "path", d.path);
  e << YAML::Key << "format" << YAML::Value << std::string(to_string(d.format));
  e << YAML::Key << "channels" << YAML::Value << d.channels;
  emit_real(e, "sampling_rate_hz", d.sampling_rate_hz);
  e << YAML::Key << "window_length" << YAML::Value << d.window_length;
  e << YAML::Key << "normalization" << YAML::Value << std::string(to_string(d.normalization));
  e << YAML::Key << "split" << YAML::Value << YAML::BeginMap;
  emit_real(e, "train", d.split.train);
  emit_real(e, "val", d.split.val);
  emit_real(e, "test", d.split.test);
  e << YAML::EndMap;
  e << YAML::Key << "missingness" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "type" << YAML::Value << d.missingness.type;
  emit_real(e, "percent", d.missingness.percent);
  e << YAML::Key << "max_gap" << YAML::Value << d.missingness.max_gap;
  emit_optional(e, "pattern_path", d.missingness.pattern_path);
  e << YAML::Key << "per_channel" << YAML::Value << d.missingness.per_channel;
  emit_optional(e, "seed", d.missingness.seed);
  e << YAML::EndMap;
  e << YAML::Key << "seed" << YAML::Value << d.seed;
  const auto& o = d.synthetic;
  if (o != SyntheticOverrides{}) {
    e << YAML::Key << "synthetic" << YAML::Value << YAML::BeginMap;
    emit_optional(e, "n_samples", o.n_samples);
    emit_optional(e, "pulse_rate_hz", o.pulse_rate_hz);
    emit_optional(e, "rate_jitter", o.rate_jitter);
    emit_optional(e, "pulse_width_s", o.pulse_width_s);
    emit_optional(e, "baseline_freq_hz", o.baseline_freq_hz);
    emit_optional(e, "baseline_amplitude", o.baseline_amplitude);
    emit_optional(e, "noise_std", o.noise_std);
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << config.model.name;
  e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  for (const auto& [key, value] : config.model.params) {
    e << YAML::Key << key << YAML::Value;
    if (const auto* n = std::get_if<double>(&value)) {
      e << *n;
    } else {
      e << YAML::DoubleQuoted << std::get<std::string>(value);
    }
  }
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "enabled" << YAML::Value << config.train.enabled;
  e << YAML::Key << "batch_size" << YAML::Value << config.train.batch_size;
  e << YAML::Key << "epochs" << YAML::Value << config.train.epochs;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string digest(const ExperimentConfig& config) { return sha256_hex(to_yaml(config)); }

ExperimentConfig merge_overrides(const ExperimentConfig& config, const CliOverrides& overrides,
                                 const fs::path& data_root) {
  ExperimentConfig merged = config;
  if (overrides.dataset_name) {
    merged.data.dataset_name = *overrides.dataset_name;
    if (dataset::is_builtin_synthetic(*overrides.dataset_name)) {
      merged.data.format = DataFormat::Synthetic;
      merged.data.path.reset();
    } else {
      // Provisional; dataset::resolve_custom_dataset settles the format.
      merged.data.format = DataFormat::Csv;
      merged.data.path = (data_root / *overrides.dataset_name).string();
    }
  }
  if (overrides.train_flag) merged.train.enabled = *overrides.train_flag;
  if (auto violations = validate(merged); !violations.empty()) throw ConfigError(std::move(violations));
  return merged;
}

ExperimentConfig default_experiment() { return parse_config(kDefaultExperiment); }

fs::path resolve_config_path(const std::string& path, const fs::path& config_dir) {
  if (fs::exists(path)) return path;
  if (fs::exists(config_dir / path)) return config_dir / path;
  throw Error(ErrorKind::IoError, "config not found: " + path + " (also looked in " + config_dir.string() + ")");
}

}  // namespace pulsekit::config
