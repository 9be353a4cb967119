#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pulsekit/evaluation.hpp"
#include "pulsekit/experiment_config.hpp"

namespace pulsekit::runner {

struct RunOptions {
  std::filesystem::path results_root = "results";
  std::filesystem::path data_root = "data";
};

struct RunOutcome {
  evaluation::EvaluationReport report;
  std::filesystem::path report_path;
  std::filesystem::path bundle_path;
  std::optional<std::filesystem::path> fitted_state_path;
  int exit_code = 0;
  /// "<stage>: <message>" when exit_code != 0.
  std::string diagnostic;
};

/// load → normalize → split → mask → (fit) → impute → evaluate → write
/// `results/<experiment>/<model>/{report.json,bundle.json,fitted_state.bin}`.
/// Stage failures return a nonzero exit code and leave their diagnostics
/// under `.../failed/`; completed outputs of earlier runs are untouched.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// `pulsekit run|visualize|export|validate ...`. Exit codes: 0 success,
/// 1 validation or runtime failure, 2 usage.
int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace pulsekit::runner
