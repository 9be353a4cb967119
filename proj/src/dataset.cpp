#include "pulsekit/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pulsekit/error.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace pulsekit::dataset {

namespace {

constexpr std::string_view kSyntheticPpg = "synthetic_ppg";
constexpr std::string_view kSyntheticEcg = "synthetic_ecg";

std::vector<std::string> default_channel_names(Eigen::Index channels) {
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < channels; ++c) names.push_back("ch" + std::to_string(c));
  return names;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> files_with_extension(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_missing_marker(std::string_view cell) {
  if (cell.empty()) return true;
  std::string lower(cell);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return lower == "nan";
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    cells.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;
};

CsvTable read_csv(const fs::path& path) {
  const std::string text = read_text(path);
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    std::vector<std::optional<double>> row;
    bool numeric = true;
    for (auto cell : cells) {
      if (is_missing_marker(cell)) {
        row.emplace_back(std::nullopt);
        continue;
      }
      auto v = parse_number(cell);
      if (!v) {
        numeric = false;
        break;
      }
      if (std::isnan(*v)) {
        row.emplace_back(std::nullopt);
      } else if (!std::isfinite(*v)) {
        throw Error(ErrorKind::FormatError, path.string() + ":" + std::to_string(line_no) +
                                                ": non-finite value");
      } else {
        row.emplace_back(v);
      }
    }
    if (!numeric) {
      if (table.rows.empty() && table.header.empty()) {
        for (auto cell : cells) table.header.emplace_back(cell);
        width = cells.size();
        continue;
      }
      throw Error(ErrorKind::FormatError,
                  path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw Error(ErrorKind::FormatError, path.string() + ":" + std::to_string(line_no) +
                                              ": expected " + std::to_string(width) +
                                              " columns, found " + std::to_string(row.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Recording recording_from_csv(const fs::path& path, Eigen::Index channels,
                             std::vector<std::string>* header) {
  CsvTable table = read_csv(path);
  const Eigen::Index width = table.rows.empty()
                                 ? static_cast<Eigen::Index>(table.header.size())
                                 : static_cast<Eigen::Index>(table.rows.front().size());
  if (width != channels) {
    throw Error(ErrorKind::FormatError, path.string() + ": " + std::to_string(width) +
                                            " columns but " + std::to_string(channels) +
                                            " channels configured");
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Recording rec{path.stem().string(), Signal::Zero(channels, n),
                MissingMatrix::Constant(channels, n, false)};
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      const auto& cell = table.rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
      if (cell) {
        rec.values(c, t) = *cell;
      } else {
        rec.missing(c, t) = true;
      }
    }
  }
  if (!rec.missing.any()) rec.missing.resize(0, 0);
  if (header && header->empty() && !table.header.empty()) *header = table.header;
  return rec;
}

std::vector<Recording> recordings_from_jsonl(const fs::path& path, Eigen::Index channels) {
  std::vector<Recording> out;
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::FormatError, where + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
        !record.contains("values") || !record["values"].is_array()) {
      throw Error(ErrorKind::FormatError, where + ": expected {\"id\": str, \"values\": [[...]]}");
    }
    const auto& values = record["values"];
    if (static_cast<Eigen::Index>(values.size()) != channels) {
      throw Error(ErrorKind::FormatError, where + ": " + std::to_string(values.size()) +
                                              " channels but " + std::to_string(channels) +
                                              " configured");
    }
    const auto length = static_cast<Eigen::Index>(values.front().is_array() ? values.front().size() : 0);
    Recording rec{record["id"].get<std::string>(), Signal::Zero(channels, length),
                  MissingMatrix::Constant(channels, length, false)};
    for (Eigen::Index c = 0; c < channels; ++c) {
      const auto& row = values[static_cast<std::size_t>(c)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != length) {
        throw Error(ErrorKind::FormatError, where + ": ragged channel arrays");
      }
      for (Eigen::Index t = 0; t < length; ++t) {
        const auto& v = row[static_cast<std::size_t>(t)];
        if (v.is_null()) {
          rec.missing(c, t) = true;
        } else if (v.is_number()) {
          rec.values(c, t) = v.get<double>();
        } else {
          throw Error(ErrorKind::FormatError, where + ": non-numeric value");
        }
      }
    }
    if (!rec.missing.any()) rec.missing.resize(0, 0);
    out.push_back(std::move(rec));
  }
  return out;
}

struct RawMeta {
  Eigen::Index channels = 0;
  double sampling_rate_hz = 0.0;
  Eigen::Index record_length = 0;
};

std::optional<json> read_meta_json(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  if (!fs::exists(meta_path)) return std::nullopt;
  try {
    return json::parse(read_text(meta_path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::FormatError, meta_path.string() + ": " + e.what());
  }
}

RawMeta read_raw_meta(const fs::path& dir) {
  auto meta = read_meta_json(dir);
  if (!meta) throw Error(ErrorKind::IoError, "missing " + (dir / "meta.json").string());
  try {
    RawMeta m{meta->at("channels").get<Eigen::Index>(), meta->at("sampling_rate_hz").get<double>(),
              meta->at("record_length").get<Eigen::Index>()};
    if (meta->value("dtype", std::string("f32le")) != "f32le") {
      throw Error(ErrorKind::FormatError, "meta.json: dtype must be \"f32le\"");
    }
    if (m.channels < 1 || m.record_length < 1 || !(m.sampling_rate_hz > 0)) {
      throw Error(ErrorKind::FormatError, "meta.json: channels, record_length and "
                                          "sampling_rate_hz must be positive");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, "meta.json: " + std::string(e.what()));
  }
}

float decode_f32le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void encode_f32le(float value, std::string& out) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((bits >> shift) & 0xFFu));
  }
}

std::vector<Recording> recordings_from_raw(const fs::path& file, const RawMeta& meta) {
  const std::string bytes = read_text(file);
  const auto frame = static_cast<std::size_t>(4 * meta.channels);
  if (bytes.size() % frame != 0) {
    throw Error(ErrorKind::FormatError, file.string() + ": byte length " +
                                            std::to_string(bytes.size()) +
                                            " is not a multiple of 4*channels");
  }
  const auto record_bytes = frame * static_cast<std::size_t>(meta.record_length);
  if (bytes.size() % record_bytes != 0) {
    throw Error(ErrorKind::FormatError, file.string() + ": byte length is not a whole number of records");
  }
  std::vector<Recording> out;
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n_records = bytes.size() / record_bytes;
  for (std::size_t r = 0; r < n_records; ++r) {
    Recording rec{file.stem().string() + "_r" + std::to_string(r),
                  Signal::Zero(meta.channels, meta.record_length),
                  MissingMatrix::Constant(meta.channels, meta.record_length, false)};
    const unsigned char* block = data + r * record_bytes;
    for (Eigen::Index c = 0; c < meta.channels; ++c) {
      for (Eigen::Index t = 0; t < meta.record_length; ++t) {
        const float v = decode_f32le(block + 4 * (c * meta.record_length + t));
        if (std::isnan(v)) {
          rec.missing(c, t) = true;
        } else if (!std::isfinite(v)) {
          throw Error(ErrorKind::FormatError, file.string() + ": non-finite value");
        } else {
          rec.values(c, t) = v;
        }
      }
    }
    if (!rec.missing.any()) rec.missing.resize(0, 0);
    out.push_back(std::move(rec));
  }
  return out;
}

void check_positive(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidValue, "synthetic: " + what);
}

}  // namespace

bool is_builtin_synthetic(std::string_view dataset_name) {
  return dataset_name == kSyntheticPpg || dataset_name == kSyntheticEcg;
}

SyntheticParams synthetic_params_for(const DataConfig& config) {
  SyntheticParams p;
  if (config.dataset_name == kSyntheticEcg) {
    // Narrow R-wave-like spikes on a slower, weaker baseline.
    p.pulse_rate_hz = 1.0;
    p.rate_jitter = 0.04;
    p.pulse_width_s = 0.03;
    p.baseline_freq_hz = 0.05;
    p.baseline_amplitude = 0.3;
  } else if (config.dataset_name != kSyntheticPpg) {
    throw Error(ErrorKind::InvalidValue, "unknown synthetic dataset " + config.dataset_name);
  }
  p.channels = config.channels;
  p.window_length = config.window_length;
  p.sampling_rate_hz = config.sampling_rate_hz;
  p.seed = config.seed;
  const auto& o = config.synthetic;
  if (o.n_samples) p.n_samples = *o.n_samples;
  if (o.pulse_rate_hz) p.pulse_rate_hz = *o.pulse_rate_hz;
  if (o.rate_jitter) p.rate_jitter = *o.rate_jitter;
  if (o.pulse_width_s) p.pulse_width_s = *o.pulse_width_s;
  if (o.baseline_freq_hz) p.baseline_freq_hz = *o.baseline_freq_hz;
  if (o.baseline_amplitude) p.baseline_amplitude = *o.baseline_amplitude;
  if (o.noise_std) p.noise_std = *o.noise_std;
  return p;
}

SignalSet generate_synthetic(const SyntheticParams& params) {
  if (params.n_samples == 0) throw Error(ErrorKind::EmptyDataset, "synthetic: n_samples is 0");
  check_positive(params.n_samples > 0, "n_samples must be positive");
  check_positive(params.channels > 0, "channels must be positive");
  check_positive(params.window_length > 0, "window_length must be positive");
  check_positive(params.sampling_rate_hz > 0, "sampling_rate_hz must be positive");
  check_positive(params.pulse_rate_hz > 0, "pulse_rate_hz must be positive");
  check_positive(params.rate_jitter >= 0 && params.rate_jitter < 0.5, "rate_jitter must lie in [0, 0.5)");
  check_positive(params.pulse_width_s > 0, "pulse_width_s must be positive");
  check_positive(params.baseline_freq_hz >= 0, "baseline_freq_hz must be non-negative");
  check_positive(params.noise_std >= 0, "noise_std must be non-negative");

  const double period = params.sampling_rate_hz / params.pulse_rate_hz;  // samples
  const double sigma = params.pulse_width_s * params.sampling_rate_hz;   // samples
  if (period < 4.0 * sigma) {
    throw Error(ErrorKind::InvalidValue,
                "synthetic: pulse period must be at least 4 pulse widths");
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index length = params.window_length;
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(length, 0.0, static_cast<double>(length - 1));
  const double reach = 6.0 * sigma;

  SignalSet set;
  set.sampling_rate_hz = params.sampling_rate_hz;
  set.channel_names = default_channel_names(params.channels);
  for (std::int64_t i = 0; i < params.n_samples; ++i) {
    Sample sample;
    char id[32];
    std::snprintf(id, sizeof id, "s%05lld", static_cast<long long>(i));
    sample.id = id;
    sample.values = Signal::Zero(params.channels, length);
    for (Eigen::Index c = 0; c < params.channels; ++c) {
      Eigen::ArrayXd x = Eigen::ArrayXd::Zero(length);
      double onset = unit(rng) * period - period;
      while (onset < static_cast<double>(length) + reach) {
        const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(onset - reach)));
        const auto hi = std::min<Eigen::Index>(length, static_cast<Eigen::Index>(std::ceil(onset + reach)) + 1);
        for (Eigen::Index k = lo; k < hi; ++k) {
          const double z = (t(k) - onset) / sigma;
          x(k) += std::exp(-0.5 * z * z);
        }
        const double jitter = params.rate_jitter * (2.0 * unit(rng) - 1.0);
        onset += period * (1.0 + jitter);
      }
      const double phase = 2.0 * std::numbers::pi * unit(rng);
      if (params.baseline_freq_hz > 0) {
        x += params.baseline_amplitude *
             (2.0 * std::numbers::pi * params.baseline_freq_hz / params.sampling_rate_hz * t + phase).sin();
      }
      if (params.noise_std > 0) {
        for (Eigen::Index k = 0; k < length; ++k) x(k) += params.noise_std * gauss(rng);
      }
      sample.values.row(c) = x.matrix().transpose();
    }
    set.samples.push_back(std::move(sample));
  }
  return set;
}

namespace {

std::vector<Recording> collect_recordings(const DataConfig& config, std::vector<std::string>* header) {
  if (!config.path) throw Error(ErrorKind::IoError, "no dataset path configured");
  const fs::path root(*config.path);
  if (!fs::exists(root)) throw Error(ErrorKind::IoError, "dataset path not found: " + root.string());
  const bool is_dir = fs::is_directory(root);

  std::vector<Recording> out;
  switch (config.format) {
    case DataFormat::Csv: {
      const auto files = is_dir ? files_with_extension(root, ".csv") : std::vector<fs::path>{root};
      for (const auto& f : files) out.push_back(recording_from_csv(f, config.channels, header));
      break;
    }
    case DataFormat::Jsonl: {
      const auto files = is_dir ? files_with_extension(root, ".jsonl") : std::vector<fs::path>{root};
      for (const auto& f : files) {
        auto recs = recordings_from_jsonl(f, config.channels);
        std::move(recs.begin(), recs.end(), std::back_inserter(out));
      }
      break;
    }
    case DataFormat::RawF32: {
      const fs::path dir = is_dir ? root : root.parent_path();
      const RawMeta meta = read_raw_meta(dir);
      if (meta.channels != config.channels) {
        throw Error(ErrorKind::FormatError, "meta.json declares " + std::to_string(meta.channels) +
                                                " channels but " + std::to_string(config.channels) +
                                                " configured");
      }
      if (std::abs(meta.sampling_rate_hz - config.sampling_rate_hz) >
          1e-9 * std::max(1.0, config.sampling_rate_hz)) {
        throw Error(ErrorKind::FormatError, "meta.json sampling_rate_hz differs from the configured rate");
      }
      const auto files = is_dir ? files_with_extension(root, ".f32") : std::vector<fs::path>{root};
      for (const auto& f : files) {
        auto recs = recordings_from_raw(f, meta);
        std::move(recs.begin(), recs.end(), std::back_inserter(out));
      }
      break;
    }
    case DataFormat::Synthetic:
      throw Error(ErrorKind::InvalidValue, "synthetic datasets have no recordings on disk");
  }
  return out;
}

}  // namespace

std::vector<Recording> read_recordings(const DataConfig& config) {
  return collect_recordings(config, nullptr);
}

SignalSet load_dataset(const DataConfig& config) {
  if (config.format == DataFormat::Synthetic) {
    return generate_synthetic(synthetic_params_for(config));
  }

  std::vector<std::string> header;
  const std::vector<Recording> recordings = collect_recordings(config, &header);

  SignalSet set;
  set.sampling_rate_hz = config.sampling_rate_hz;
  set.channel_names = header.size() == static_cast<std::size_t>(config.channels)
                          ? header
                          : default_channel_names(config.channels);
  const bool any_missing = std::any_of(recordings.begin(), recordings.end(),
                                       [](const Recording& r) { return r.missing.size() > 0; });
  for (const auto& rec : recordings) {
    if (rec.values.cols() < config.window_length) {
      throw Error(ErrorKind::InvalidValue, "recording " + rec.id + " has " +
                                               std::to_string(rec.values.cols()) +
                                               " timesteps, shorter than window_length " +
                                               std::to_string(config.window_length));
    }
    auto windows = window(rec.values, config.window_length, rec.id + "_w");
    for (std::size_t k = 0; k < windows.size(); ++k) {
      if (any_missing) {
        const auto start = static_cast<Eigen::Index>(k) * config.window_length;
        set.source_missing.push_back(
            rec.missing.size() > 0
                ? MissingMatrix(rec.missing.middleCols(start, config.window_length))
                : MissingMatrix::Constant(config.channels, config.window_length, false));
      }
      set.samples.push_back(std::move(windows[k]));
    }
  }
  if (set.samples.empty()) {
    throw Error(ErrorKind::EmptyDataset, "no samples in " + config.path.value_or("<none>"));
  }
  return set;
}

std::vector<Sample> window(const Signal& continuous, Eigen::Index window_length,
                           const std::string& id_prefix) {
  if (window_length < 1) throw Error(ErrorKind::InvalidValue, "window_length must be positive");
  if (continuous.cols() < window_length) {
    throw Error(ErrorKind::InvalidValue, "signal of " + std::to_string(continuous.cols()) +
                                             " timesteps is shorter than window_length " +
                                             std::to_string(window_length));
  }
  const Eigen::Index n = continuous.cols() / window_length;
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    out.push_back({id_prefix + std::to_string(k), continuous.middleCols(k * window_length, window_length)});
  }
  return out;
}

Normalized normalize_zscore(const SignalSet& set) {
  if (set.empty()) throw Error(ErrorKind::EmptyDataset, "cannot normalize an empty set");
  const Eigen::Index channels = set.channels();
  Normalized out{set, {Eigen::VectorXd::Zero(channels), Eigen::VectorXd::Zero(channels)}};

  auto observed = [&](std::size_t i) -> MissingMatrix {
    if (set.has_source_missing()) return !set.source_missing[i];
    return MissingMatrix::Constant(channels, set.samples[i].length(), true);
  };

  for (Eigen::Index c = 0; c < channels; ++c) {
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const MissingMatrix obs_all = observed(i);
      const auto obs = obs_all.row(c);
      sum += obs.select(set.samples[i].values.row(c).array(), 0.0).sum();
      count += static_cast<double>(obs.count());
    }
    if (count == 0) throw Error(ErrorKind::DegenerateChannel, "channel " + std::to_string(c) + " has no values");
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const MissingMatrix obs_all = observed(i);
      const auto obs = obs_all.row(c);
      ss += obs.select((set.samples[i].values.row(c).array() - mean).square(), 0.0).sum();
    }
    const double std = std::sqrt(ss / count);
    if (!(std > 1e-12 * std::max(1.0, std::abs(mean)))) {
      throw Error(ErrorKind::DegenerateChannel, "channel " + std::to_string(c) + " is constant");
    }
    out.stats.mean(c) = mean;
    out.stats.std(c) = std;
  }

  for (std::size_t i = 0; i < out.set.size(); ++i) {
    auto& v = out.set.samples[i].values;
    v = (v.colwise() - out.stats.mean).array().colwise() / out.stats.std.array();
    if (set.has_source_missing()) v = set.source_missing[i].select(0.0, v.array()).matrix();
  }
  return out;
}

SplitSets split(const SignalSet& set, const SplitFractions& fractions, std::uint64_t seed) {
  const std::size_t n = set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto rounded = [n](double f) {
    return static_cast<std::size_t>(std::max<long long>(0, std::llround(f * static_cast<double>(n))));
  };
  const std::size_t n_train = std::min(n, rounded(fractions.train));
  const std::size_t n_val = std::min(n - n_train, rounded(fractions.val));

  auto take = [&](std::size_t begin, std::size_t end, SplitTag tag) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                 order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(idx.begin(), idx.end());
    SignalSet part;
    part.sampling_rate_hz = set.sampling_rate_hz;
    part.channel_names = set.channel_names;
    part.split_tag = tag;
    for (auto i : idx) {
      part.samples.push_back(set.samples[i]);
      if (set.has_source_missing()) part.source_missing.push_back(set.source_missing[i]);
    }
    return part;
  };
  return {take(0, n_train, SplitTag::Train), take(n_train, n_train + n_val, SplitTag::Val),
          take(n_train + n_val, n, SplitTag::Test)};
}

void write_raw_f32(const SignalSet& set, const fs::path& dir) {
  if (set.empty()) throw Error(ErrorKind::EmptyDataset, "nothing to write");
  fs::create_directories(dir);
  json meta = {{"channels", set.channels()},
               {"sampling_rate_hz", set.sampling_rate_hz},
               {"record_length", set.window_length()},
               {"dtype", "f32le"}};
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";

  std::string bytes;
  bytes.reserve(set.size() * static_cast<std::size_t>(4 * set.channels() * set.window_length()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& v = set.samples[i].values;
    for (Eigen::Index c = 0; c < v.rows(); ++c) {
      for (Eigen::Index t = 0; t < v.cols(); ++t) {
        const bool missing = set.has_source_missing() && set.source_missing[i](c, t);
        encode_f32le(missing ? std::numeric_limits<float>::quiet_NaN() : static_cast<float>(v(c, t)), bytes);
      }
    }
  }
  std::ofstream out(dir / "data.f32", std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + (dir / "data.f32").string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

fs::path data_root() {
  if (const char* env = std::getenv("PULSEKIT_DATA_DIR"); env && *env) return env;
  return "data";
}

void resolve_custom_dataset(DataConfig& config, const fs::path& root) {
  const fs::path dir = root / config.dataset_name;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::IoError, "custom dataset '" + config.dataset_name + "' not found under " +
                                        root.string());
  }
  config.path = dir.string();
  const auto meta = read_meta_json(dir);
  if (meta && meta->contains("sampling_rate_hz")) {
    config.sampling_rate_hz = meta->at("sampling_rate_hz").get<double>();
  }

  if (meta && meta->value("dtype", std::string()) == "f32le" && !files_with_extension(dir, ".f32").empty()) {
    config.format = DataFormat::RawF32;
    config.channels = read_raw_meta(dir).channels;
  } else if (auto jsonl = files_with_extension(dir, ".jsonl"); !jsonl.empty()) {
    config.format = DataFormat::Jsonl;
    std::ifstream in(jsonl.front());
    std::string line;
    while (std::getline(in, line) && trim(line).empty()) {}
    try {
      config.channels = static_cast<std::int64_t>(json::parse(line).at("values").size());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::FormatError, jsonl.front().string() + ": " + e.what());
    }
  } else if (auto csv = files_with_extension(dir, ".csv"); !csv.empty()) {
    config.format = DataFormat::Csv;
    const CsvTable table = read_csv(csv.front());
    config.channels = static_cast<std::int64_t>(
        table.rows.empty() ? table.header.size() : table.rows.front().size());
  } else {
    throw Error(ErrorKind::FormatError, "no .csv, .jsonl or .f32 files in " + dir.string());
  }
  if (meta && meta->contains("channels")) config.channels = meta->at("channels").get<std::int64_t>();
}

}  // namespace pulsekit::dataset
