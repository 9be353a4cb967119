#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pulsekit/error.hpp"
#include "pulsekit/experiment_config.hpp"

namespace pulsekit::config {

struct ParseOptions {
  /// Reject keys outside the schema with UnknownField.
  bool strict = true;
};

/// Structural parse plus validation, reporting every problem found.
/// `config` is set whenever the document could be read as a mapping with
/// all three sections; in that case `violations` also holds validate()'s
/// findings.
struct ParseReport {
  std::optional<ExperimentConfig> config;
  std::vector<Violation> violations;
};

ParseReport check_document(const std::string& text, const ParseOptions& options = {});

/// Throws ConfigError (SyntaxError, MissingSection, UnknownField,
/// InvalidValue, UnknownModel, UnknownMissingness) unless the document is
/// runnable as written.
ExperimentConfig parse_config(const std::string& text, const ParseOptions& options = {});
ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  const ParseOptions& options = {});

/// All violations, in schema order; empty means runnable.
std::vector<Violation> validate(const ExperimentConfig& config);

/// Canonical YAML rendering with every field spelled out.
std::string to_yaml(const ExperimentConfig& config);

/// SHA-256 hex of `to_yaml(config)`.
std::string digest(const ExperimentConfig& config);

struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::string> dataset_name;
  std::optional<bool> train_flag;
};

/// `dataset_name` replaces data.dataset_name: built-in synthetic names
/// switch to the generator, anything else points data.path at
/// `<data_root>/<name>` for custom-dataset lookup. Throws ConfigError when
/// the merged config does not validate.
ExperimentConfig merge_overrides(const ExperimentConfig& config, const CliOverrides& overrides,
                                 const std::filesystem::path& data_root = "data");

/// Experiment used when only a dataset is named on the command line.
ExperimentConfig default_experiment();

/// `-c` resolution: the path as given, else relative to `config_dir`
/// (the `configs/<ModelName>/<experiment>.yaml` tree).
std::filesystem::path resolve_config_path(const std::string& path,
                                          const std::filesystem::path& config_dir);

}  // namespace pulsekit::config
