#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pulsekit/experiment_config.hpp"
#include "pulsekit/signal.hpp"

namespace pulsekit::missingness {

using Rng = std::mt19937_64;

/// splitmix64 finalizer (Steele, Lea & Flood constants 0x9E3779B97F4A7C15,
/// 0xBF58476D1CE4E5B9, 0x94D049BB133111EB).
std::uint64_t splitmix64(std::uint64_t x);

/// Per-sample stream: seed XOR splitmix64(sample_index).
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t sample_index);

/// A missingness mechanism turns a sample shape and a seed into a mask.
class Mechanism {
 public:
  virtual ~Mechanism() = default;
  virtual Mask generate(Eigen::Index channels, Eigen::Index length, std::uint64_t seed) const = 0;

  MaskedSample apply(const Sample& sample, std::uint64_t seed) const {
    return make_masked(sample, generate(sample.channels(), sample.length(), seed));
  }
};

using MechanismFactory = std::function<std::unique_ptr<Mechanism>(const MissingnessSpec&)>;

/// Maps missingness type names to mechanism factories. The four built-in
/// types are registered on first use; custom types may be added at startup.
class Registry {
 public:
  static Registry& instance();

  void add(const std::string& name, MechanismFactory factory);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;
  std::unique_ptr<Mechanism> create(const MissingnessSpec& spec) const;

 private:
  Registry();
  std::map<std::string, MechanismFactory> factories_;
};

/// Throws UnknownMissingness for unregistered types.
std::unique_ptr<Mechanism> dispatch(const MissingnessSpec& spec);

// Mask generators. Every generator draws only from `rng`.

Mask extended_mask(Eigen::Index channels, Eigen::Index length, double percent, bool per_channel,
                   Rng& rng);
Mask transient_mask(Eigen::Index channels, Eigen::Index length, double percent,
                    std::int64_t max_gap, bool per_channel, Rng& rng);
Mask mcar_mask(Eigen::Index channels, Eigen::Index length, double percent, bool per_channel,
               Rng& rng);

/// Rows of a 0/1 pattern CSV.
struct PatternSet {
  std::vector<std::vector<bool>> rows;

  static PatternSet load(const std::filesystem::path& path);
};

Mask pattern_mask(const PatternSet& patterns, Eigen::Index channels, Eigen::Index length,
                  bool per_channel, Rng& rng);

MaskedSample apply_extended(const Sample& sample, double percent, std::uint64_t seed,
                            bool per_channel = false);
MaskedSample apply_transient(const Sample& sample, double percent, std::int64_t max_gap,
                             std::uint64_t seed, bool per_channel = false);
MaskedSample apply_mcar_points(const Sample& sample, double percent, std::uint64_t seed,
                               bool per_channel = false);
MaskedSample apply_pattern(const Sample& sample, const std::filesystem::path& pattern_path,
                           std::uint64_t seed, bool per_channel = false);

/// Rejects samples where a channel keeps fewer than two observed points.
MaskedSample min_observed_guard(MaskedSample masked);

inline constexpr Eigen::Index kMinObserved = 2;

}  // namespace pulsekit::missingness
