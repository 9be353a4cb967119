#include "pulsekit/missingness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pulsekit/error.hpp"

namespace fs = std::filesystem;

namespace pulsekit::missingness {

namespace {

constexpr int kPlacementAttempts = 100;

Eigen::Index target_count(double percent, Eigen::Index length) {
  return static_cast<Eigen::Index>(std::llround(percent * static_cast<double>(length)));
}

Eigen::Index uniform_index(Rng& rng, Eigen::Index lo, Eigen::Index hi) {
  return std::uniform_int_distribution<Eigen::Index>(lo, hi)(rng);
}

/// Shared masks draw one row and broadcast it; per-channel masks draw each row in turn.
template <typename RowFn>
Mask build(Eigen::Index channels, Eigen::Index length, bool per_channel, RowFn&& draw_row) {
  Mask mask{MissingMatrix::Constant(channels, length, false)};
  if (channels == 0) return mask;
  if (per_channel) {
    for (Eigen::Index c = 0; c < channels; ++c) mask.missing.row(c) = draw_row();
  } else {
    const Eigen::Array<bool, 1, Eigen::Dynamic> row = draw_row();
    mask.missing.rowwise() = row;
  }
  return mask;
}

using Row = Eigen::Array<bool, 1, Eigen::Dynamic>;

/// Gap lengths uniform in [1, max_gap], the last one truncated so they sum
/// to `total`.
std::vector<Eigen::Index> draw_gap_lengths(Eigen::Index total, Eigen::Index max_gap, Rng& rng) {
  std::vector<Eigen::Index> gaps;
  Eigen::Index remaining = total;
  while (remaining > 0) {
    const Eigen::Index len = std::min(remaining, uniform_index(rng, 1, max_gap));
    gaps.push_back(len);
    remaining -= len;
  }
  return gaps;
}

Row transient_row(Eigen::Index length, double percent, Eigen::Index max_gap, Rng& rng) {
  const Eigen::Index total = target_count(percent, length);
  Row row = Row::Constant(length, false);
  if (total == 0) return row;

  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    const auto gaps = draw_gap_lengths(total, max_gap, rng);
    const auto n_gaps = static_cast<Eigen::Index>(gaps.size());
    // Gaps must not touch, otherwise two of them merge into one longer run.
    const Eigen::Index slack = length - total - (n_gaps - 1);
    if (slack < 0) continue;

    // A uniformly random non-overlapping arrangement: spread `slack` free
    // cells over the n_gaps + 1 spaces around the gaps (stars and bars).
    std::vector<Eigen::Index> bars(static_cast<std::size_t>(n_gaps));
    {
      std::vector<Eigen::Index> cells(static_cast<std::size_t>(slack + n_gaps));
      std::iota(cells.begin(), cells.end(), Eigen::Index{0});
      for (Eigen::Index k = 0; k < n_gaps; ++k) {
        const auto j = uniform_index(rng, k, static_cast<Eigen::Index>(cells.size()) - 1);
        std::swap(cells[static_cast<std::size_t>(k)], cells[static_cast<std::size_t>(j)]);
      }
      std::copy_n(cells.begin(), n_gaps, bars.begin());
      std::sort(bars.begin(), bars.end());
    }
    Eigen::Index cursor = 0;
    Eigen::Index previous_bar = -1;
    for (Eigen::Index k = 0; k < n_gaps; ++k) {
      const Eigen::Index space = bars[static_cast<std::size_t>(k)] - previous_bar - 1;
      previous_bar = bars[static_cast<std::size_t>(k)];
      cursor += space + (k > 0 ? 1 : 0);
      const Eigen::Index len = gaps[static_cast<std::size_t>(k)];
      row.segment(cursor, len) = true;
      cursor += len;
    }
    return row;
  }
  throw Error(ErrorKind::PlacementFailure,
              "cannot place " + std::to_string(total) + " missing timesteps in gaps of at most " +
                  std::to_string(max_gap) + " within " + std::to_string(length) +
                  " timesteps without touching gaps");
}

void require_percent(double percent, bool allow_zero, const char* mechanism) {
  const bool ok = allow_zero ? (percent >= 0.0 && percent < 1.0) : (percent > 0.0 && percent < 1.0);
  if (!ok) {
    throw Error(ErrorKind::InvalidValue, std::string(mechanism) + ": percent " +
                                             std::to_string(percent) +
                                             (allow_zero ? " must lie in [0,1)" : " must lie in (0,1)"));
  }
}

class ExtendedMechanism final : public Mechanism {
 public:
  explicit ExtendedMechanism(const MissingnessSpec& spec) : spec_(spec) {}
  Mask generate(Eigen::Index channels, Eigen::Index length, std::uint64_t seed) const override {
    Rng rng(seed);
    return extended_mask(channels, length, spec_.percent, spec_.per_channel, rng);
  }

 private:
  MissingnessSpec spec_;
};

class TransientMechanism final : public Mechanism {
 public:
  explicit TransientMechanism(const MissingnessSpec& spec) : spec_(spec) {}
  Mask generate(Eigen::Index channels, Eigen::Index length, std::uint64_t seed) const override {
    Rng rng(seed);
    return transient_mask(channels, length, spec_.percent, spec_.max_gap, spec_.per_channel, rng);
  }

 private:
  MissingnessSpec spec_;
};

class McarMechanism final : public Mechanism {
 public:
  explicit McarMechanism(const MissingnessSpec& spec) : spec_(spec) {}
  Mask generate(Eigen::Index channels, Eigen::Index length, std::uint64_t seed) const override {
    Rng rng(seed);
    return mcar_mask(channels, length, spec_.percent, spec_.per_channel, rng);
  }

 private:
  MissingnessSpec spec_;
};

class PatternMechanism final : public Mechanism {
 public:
  explicit PatternMechanism(const MissingnessSpec& spec)
      : per_channel_(spec.per_channel) {
    if (!spec.pattern_path) throw Error(ErrorKind::InvalidValue, "pattern_file needs pattern_path");
    patterns_ = PatternSet::load(*spec.pattern_path);
  }
  Mask generate(Eigen::Index channels, Eigen::Index length, std::uint64_t seed) const override {
    Rng rng(seed);
    return pattern_mask(patterns_, channels, length, per_channel_, rng);
  }

 private:
  PatternSet patterns_;
  bool per_channel_;
};

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t sample_index) {
  return seed ^ splitmix64(sample_index);
}

Registry::Registry() {
  factories_["extended"] = [](const MissingnessSpec& s) { return std::make_unique<ExtendedMechanism>(s); };
  factories_["transient"] = [](const MissingnessSpec& s) { return std::make_unique<TransientMechanism>(s); };
  factories_["mcar_points"] = [](const MissingnessSpec& s) { return std::make_unique<McarMechanism>(s); };
  factories_["pattern_file"] = [](const MissingnessSpec& s) { return std::make_unique<PatternMechanism>(s); };
}

Registry& Registry::instance() {
  static Registry registry;
  return registry;
}

void Registry::add(const std::string& name, MechanismFactory factory) {
  factories_[name] = std::move(factory);
}

bool Registry::contains(const std::string& name) const { return factories_.count(name) > 0; }

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

std::unique_ptr<Mechanism> Registry::create(const MissingnessSpec& spec) const {
  const auto it = factories_.find(spec.type);
  if (it == factories_.end()) {
    throw Error(ErrorKind::UnknownMissingness, "no missingness mechanism named '" + spec.type + "'");
  }
  return it->second(spec);
}

std::unique_ptr<Mechanism> dispatch(const MissingnessSpec& spec) {
  return Registry::instance().create(spec);
}

Mask extended_mask(Eigen::Index channels, Eigen::Index length, double percent, bool per_channel,
                   Rng& rng) {
  require_percent(percent, false, "extended");
  const Eigen::Index run = target_count(percent, length);
  if (run < 1) {
    throw Error(ErrorKind::InvalidValue, "extended: percent * window_length rounds to 0 timesteps");
  }
  return build(channels, length, per_channel, [&] {
    Row row = Row::Constant(length, false);
    row.segment(uniform_index(rng, 0, length - run), run) = true;
    return row;
  });
}

Mask transient_mask(Eigen::Index channels, Eigen::Index length, double percent,
                    std::int64_t max_gap, bool per_channel, Rng& rng) {
  require_percent(percent, false, "transient");
  if (max_gap < 1) throw Error(ErrorKind::InvalidValue, "transient: max_gap must be at least 1");
  return build(channels, length, per_channel,
               [&] { return transient_row(length, percent, max_gap, rng); });
}

Mask mcar_mask(Eigen::Index channels, Eigen::Index length, double percent, bool per_channel,
               Rng& rng) {
  require_percent(percent, true, "mcar_points");
  std::bernoulli_distribution coin(percent);
  return build(channels, length, per_channel, [&] {
    Row row(length);
    for (Eigen::Index t = 0; t < length; ++t) row(t) = coin(rng);
    return row;
  });
}

PatternSet PatternSet::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open pattern file " + path.string());
  PatternSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<bool> row;
    std::stringstream cells(line);
    std::string cell;
    bool blank = true;
    while (std::getline(cells, cell, ',')) {
      cell.erase(std::remove_if(cell.begin(), cell.end(), [](unsigned char ch) { return std::isspace(ch); }),
                 cell.end());
      if (cell.empty() && blank) continue;
      blank = false;
      if (cell != "0" && cell != "1") {
        throw Error(ErrorKind::FormatError, path.string() + ":" + std::to_string(line_no) +
                                                ": pattern values must be 0 or 1, found '" + cell + "'");
      }
      row.push_back(cell == "1");
    }
    if (!row.empty()) set.rows.push_back(std::move(row));
  }
  if (set.rows.empty()) throw Error(ErrorKind::FormatError, path.string() + ": no mask rows");
  return set;
}

Mask pattern_mask(const PatternSet& patterns, Eigen::Index channels, Eigen::Index length,
                  bool per_channel, Rng& rng) {
  if (patterns.rows.empty()) throw Error(ErrorKind::FormatError, "pattern set is empty");
  for (const auto& row : patterns.rows) {
    if (static_cast<Eigen::Index>(row.size()) < length) {
      throw Error(ErrorKind::FormatError, "pattern row of length " + std::to_string(row.size()) +
                                              " is shorter than window_length " +
                                              std::to_string(length));
    }
  }
  const auto n_rows = static_cast<Eigen::Index>(patterns.rows.size());
  auto crop = [&](Eigen::Index r) {
    const auto& src = patterns.rows[static_cast<std::size_t>(r)];
    const Eigen::Index offset = uniform_index(rng, 0, static_cast<Eigen::Index>(src.size()) - length);
    Row row(length);
    for (Eigen::Index t = 0; t < length; ++t) row(t) = src[static_cast<std::size_t>(offset + t)];
    return row;
  };

  if (per_channel && n_rows >= channels) {
    // Distinct rows per channel: partial Fisher-Yates over row indices.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_rows));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Mask mask{MissingMatrix::Constant(channels, length, false)};
    for (Eigen::Index c = 0; c < channels; ++c) {
      const auto j = uniform_index(rng, c, n_rows - 1);
      std::swap(order[static_cast<std::size_t>(c)], order[static_cast<std::size_t>(j)]);
      mask.missing.row(c) = crop(order[static_cast<std::size_t>(c)]);
    }
    return mask;
  }
  return build(channels, length, false, [&] { return crop(uniform_index(rng, 0, n_rows - 1)); });
}

MaskedSample apply_extended(const Sample& sample, double percent, std::uint64_t seed,
                            bool per_channel) {
  Rng rng(seed);
  return make_masked(sample, extended_mask(sample.channels(), sample.length(), percent, per_channel, rng));
}

MaskedSample apply_transient(const Sample& sample, double percent, std::int64_t max_gap,
                             std::uint64_t seed, bool per_channel) {
  Rng rng(seed);
  return make_masked(sample, transient_mask(sample.channels(), sample.length(), percent, max_gap,
                                            per_channel, rng));
}

MaskedSample apply_mcar_points(const Sample& sample, double percent, std::uint64_t seed,
                               bool per_channel) {
  Rng rng(seed);
  return make_masked(sample, mcar_mask(sample.channels(), sample.length(), percent, per_channel, rng));
}

MaskedSample apply_pattern(const Sample& sample, const fs::path& pattern_path, std::uint64_t seed,
                           bool per_channel) {
  const PatternSet patterns = PatternSet::load(pattern_path);
  Rng rng(seed);
  return make_masked(sample, pattern_mask(patterns, sample.channels(), sample.length(), per_channel, rng));
}

MaskedSample min_observed_guard(MaskedSample masked) {
  for (Eigen::Index c = 0; c < masked.mask.channels(); ++c) {
    const Eigen::Index observed = masked.mask.length() - masked.mask.missing.row(c).count();
    if (observed < kMinObserved) {
      throw Error(ErrorKind::ChannelFullyMissing,
                  "sample " + masked.id() + " channel " + std::to_string(c) + " keeps " +
                      std::to_string(observed) + " observed points, needs " +
                      std::to_string(kMinObserved));
    }
  }
  return masked;
}

}  // namespace pulsekit::missingness
