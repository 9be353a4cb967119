#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pulsekit/bundle.hpp"

namespace pulsekit::plot {

struct VisualizeRequest {
  std::filesystem::path results_root = "results";
  std::string experiment;
  /// When set, the stored results must have been produced with this
  /// missingness type / percent.
  std::optional<std::string> missingness_type;
  std::optional<double> missingness_percent;
  std::vector<std::string> models;
  Eigen::Index sample_index = 0;
  Eigen::Index x_range = 5000;
  std::filesystem::path save_path;
};

/// SVG of the ground truth plus every model's imputation for one bundle
/// entry over [0, x_range) (clamped to the window), missing runs shaded.
std::string render_svg(const bundle::Bundle& bundle, Eigen::Index sample_index,
                       Eigen::Index x_range);

/// Reads results/<experiment>/<model>/bundle.json for each model, renders
/// and writes `save_path`. Throws MissingResults or InvalidValue.
std::filesystem::path visualize_standalone(const VisualizeRequest& request);

}  // namespace pulsekit::plot
