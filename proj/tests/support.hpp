#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "pulsekit/error.hpp"
#include "pulsekit/signal.hpp"

namespace testing {

inline const std::filesystem::path kSourceDir = PULSEKIT_SOURCE_DIR;
inline const std::filesystem::path kFixtures = kSourceDir / "tests" / "fixtures";

/// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("pulsekit_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

inline pulsekit::Sample random_sample(std::mt19937_64& rng, Eigen::Index channels, Eigen::Index length,
                                      const std::string& id = "r") {
  std::normal_distribution<double> gauss(0.0, 1.0);
  pulsekit::Sample s{id, pulsekit::Signal(channels, length)};
  for (Eigen::Index c = 0; c < channels; ++c)
    for (Eigen::Index t = 0; t < length; ++t) s.values(c, t) = gauss(rng);
  return s;
}

/// Bitwise equality, so -0.0 vs 0.0 and NaN payloads count as differences.
inline bool bit_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

}  // namespace testing
