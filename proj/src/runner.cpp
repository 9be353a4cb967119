#include "pulsekit/runner.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulsekit/bundle.hpp"
#include "pulsekit/config.hpp"
#include "pulsekit/dataset.hpp"
#include "pulsekit/imputers.hpp"
#include "pulsekit/missingness.hpp"
#include "pulsekit/plot.hpp"

namespace fs = std::filesystem;

namespace pulsekit::runner {

namespace {

/// Exclusive claim on an output directory for the lifetime of one run.
class DirectoryLock {
 public:
  explicit DirectoryLock(fs::path path) : path_(std::move(path)) {
    file_ = std::fopen(path_.c_str(), "wx");
    if (!file_) {
      throw Error(ErrorKind::IoError, "output directory is locked by another run (" + path_.string() + ")");
    }
  }
  ~DirectoryLock() {
    std::fclose(file_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
  std::FILE* file_ = nullptr;
};

void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

std::string join_failures(const std::vector<imputers::SampleFailure>& failures) {
  std::string s;
  for (const auto& f : failures) {
    if (!s.empty()) s += "; ";
    s += f.message;
  }
  return s;
}

std::string describe_all(const std::vector<Violation>& violations) {
  std::string s;
  for (const auto& v : violations) s += "  " + describe(v) + "\n";
  return s;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  RunOutcome outcome;
  if (auto violations = config::validate(config); !violations.empty()) {
    outcome.exit_code = 1;
    outcome.diagnostic = std::string("validate: ") + ConfigError(violations).what();
    return outcome;
  }

  const fs::path out_dir = options.results_root / config.experiment_name / config.model.name;
  std::string stage = "prepare";
  std::optional<evaluation::EvaluationReport> partial_report;
  try {
    fs::create_directories(out_dir);
    DirectoryLock lock(out_dir / ".lock");
    try {
      stage = "load";
      SignalSet set = dataset::load_dataset(config.data);

      if (config.data.normalization == Normalization::ZScore) {
        stage = "normalize";
        set = dataset::normalize_zscore(set).set;
      }

      stage = "split";
      auto parts = dataset::split(set, config.data.split, config.data.seed);
      const SignalSet& evaluated = parts.test.empty() ? set : parts.test;

      stage = "missingness";
      const auto mechanism = missingness::dispatch(config.data.missingness);
      const std::uint64_t mask_seed = config.data.missingness_seed();
      std::vector<MaskedSample> masked;
      std::vector<Mask> scoring;  // simulated-missing positions with known truth
      masked.reserve(evaluated.size());
      for (std::size_t i = 0; i < evaluated.size(); ++i) {
        MaskedSample m = mechanism->apply(evaluated.samples[i], missingness::sample_seed(mask_seed, i));
        Mask score_mask = m.mask;
        if (evaluated.has_source_missing()) {
          score_mask.missing = m.mask.missing && !evaluated.source_missing[i];
          m.mask.missing = m.mask.missing || evaluated.source_missing[i];
        }
        masked.push_back(missingness::min_observed_guard(std::move(m)));
        scoring.push_back(std::move(score_mask));
      }

      stage = "fit";
      const auto imputer = imputers::registry_lookup(config.model.name, config.model.params);
      std::optional<imputers::FittedState> state;
      const fs::path state_path = out_dir / "fitted_state.bin";
      if (config.train.enabled) {
        state = imputers::fit(*imputer, parts.train);
        imputers::save_fitted_state(*state, state_path);
        outcome.fitted_state_path = state_path;
      } else if (imputer->needs_fit()) {
        if (!fs::exists(state_path)) {
          throw Error(ErrorKind::MissingFitState,
                      config.model.name + " needs a fitted state; run with train enabled first");
        }
        state = imputers::load_fitted_state(state_path);
        outcome.fitted_state_path = state_path;
      }

      stage = "impute";
      auto batch = imputers::impute_batch(*imputer, state, masked, config.train.batch_size,
                                          imputers::FailurePolicy::Collect);

      stage = "evaluate";
      std::vector<evaluation::SampleScore> scores;
      {
        std::size_t r = 0;
        for (std::size_t i = 0; i < masked.size() && r < batch.results.size(); ++i) {
          if (batch.results[r].sample_id != masked[i].id()) continue;  // failed sample
          if (scoring[i].any()) {
            scores.push_back(evaluation::score_sample(masked[i].ground_truth, batch.results[r].imputed, scoring[i]));
          }
          ++r;
        }
      }
      const evaluation::ReportHeader header{config.experiment_name, config.model.name,
                                            config::digest(config), config.data.seed};
      if (!scores.empty()) partial_report = evaluation::aggregate(scores, header);
      if (!batch.failures.empty()) {
        throw Error(ErrorKind::SampleFailed, std::to_string(batch.failures.size()) + " sample(s) failed: " +
                                                 join_failures(batch.failures));
      }
      if (!partial_report) throw Error(ErrorKind::EmptyMask, "no evaluated sample has missing positions to score");
      outcome.report = *partial_report;

      stage = "export";
      const bundle::ModelRun run{config.model.name, std::move(batch.results), scores};
      const bundle::BundleMeta meta{config.experiment_name, config.data.missingness.type,
                                    config.data.missingness.percent, set.sampling_rate_hz};
      const auto bundle = bundle::export_bundle(masked, std::span(&run, 1), meta);

      stage = "write";
      outcome.report_path = out_dir / "report.json";
      outcome.bundle_path = out_dir / "bundle.json";
      write_atomically(outcome.report_path, evaluation::to_json(outcome.report));
      write_atomically(outcome.bundle_path, bundle::to_json(bundle));
      std::error_code ec;
      fs::remove_all(out_dir / "failed", ec);
    } catch (const Error& e) {
      outcome.exit_code = 1;
      outcome.diagnostic = stage + ": " + e.what();
      const fs::path failed = out_dir / "failed";
      fs::create_directories(failed);
      nlohmann::ordered_json diag = {{"stage", stage}, {"kind", std::string(to_string(e.kind()))},
                                     {"message", e.what()}};
      write_atomically(failed / "diagnostic.json", diag.dump(2) + "\n");
      if (partial_report) write_atomically(failed / "report.json", evaluation::to_json(*partial_report));
    }
  } catch (const Error& e) {
    outcome.exit_code = 1;
    outcome.diagnostic = stage + ": " + e.what();
  } catch (const fs::filesystem_error& e) {
    outcome.exit_code = 1;
    outcome.diagnostic = stage + ": " + e.what();
  }
  return outcome;
}

namespace {

std::optional<bool> parse_bool_token(std::string token) {
  for (auto& ch : token) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (token == "true") return true;
  if (token == "false") return false;
  return std::nullopt;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

int run_command(const config::CliOverrides& overrides, const std::string& config_dir,
                const std::string& results_dir, const std::string& data_dir, std::ostream& out,
                std::ostream& err) {
  const fs::path data_root = data_dir.empty() ? dataset::data_root() : fs::path(data_dir);
  ExperimentConfig merged;
  try {
    const ExperimentConfig base =
        overrides.config_path
            ? config::load_config_file(config::resolve_config_path(*overrides.config_path, config_dir))
            : config::default_experiment();
    merged = config::merge_overrides(base, overrides, data_root);
    if (overrides.dataset_name && !dataset::is_builtin_synthetic(*overrides.dataset_name)) {
      dataset::resolve_custom_dataset(merged.data, data_root);
      if (auto violations = config::validate(merged); !violations.empty()) throw ConfigError(violations);
    }
  } catch (const ConfigError& e) {
    err << "invalid configuration:\n" << describe_all(e.violations());
    return 1;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }

  const RunOutcome outcome = run_experiment(merged, {results_dir, data_root});
  if (outcome.exit_code != 0) {
    err << "run failed at " << outcome.diagnostic << "\n";
    return outcome.exit_code;
  }
  const auto& agg = outcome.report.aggregate;
  out << merged.experiment_name << "/" << merged.model.name << ": mse " << agg.mse << ", mae " << agg.mae
      << " over " << outcome.report.n_samples << " samples (" << agg.n_missing << " missing points)\n"
      << "  report: " << outcome.report_path.string() << "\n"
      << "  bundle: " << outcome.bundle_path.string() << "\n";
  return 0;
}

}  // namespace

int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  // `-train False` is accepted as written.
  for (auto& a : args) {
    if (a == "-train") a = "--train";
    else if (a.rfind("-train=", 0) == 0) a = "-" + a;
  }

  CLI::App app{"Biosignal imputation workbench", "pulsekit"};
  app.require_subcommand(1);

  config::CliOverrides overrides;
  std::string config_path, dataset_name, train_token;
  std::string config_dir = env_or("PULSEKIT_CONFIG_DIR", "configs");
  std::string results_dir = env_or("PULSEKIT_RESULTS_DIR", "results");
  std::string data_dir;

  auto* run = app.add_subcommand("run", "run one experiment end to end");
  run->add_option("-c,--config", config_path, "experiment config (path, or relative to the config dir)");
  run->add_option("-d,--dataset", dataset_name, "dataset name (built-in synthetic or under $PULSEKIT_DATA_DIR)");
  run->add_option("--train", train_token, "True/False: fit the model on the train split");
  run->add_option("--config-dir", config_dir, "root of configs/<Model>/<experiment>.yaml");
  run->add_option("--results-dir", results_dir, "output root");
  run->add_option("--data-dir", data_dir, "custom dataset root (overrides $PULSEKIT_DATA_DIR)");

  plot::VisualizeRequest request;
  std::string results_dir_vis;
  std::string missingness_type;
  double missingness_percent = -1.0;
  std::string save_path;
  auto* vis = app.add_subcommand("visualize", "plot stored imputations of one sample to SVG");
  vis->add_option("-e,--experiment,--task", request.experiment, "experiment name")->required();
  vis->add_option("-m,--models", request.models, "models to overlay")->delimiter(',')->required();
  vis->add_option("--missingness", missingness_type, "expected missingness type");
  vis->add_option("--percent", missingness_percent, "expected missingness fraction");
  vis->add_option("--sample-index", request.sample_index, "bundle entry to plot");
  vis->add_option("--x-range", request.x_range, "timesteps to show from 0");
  vis->add_option("-o,--save-path", save_path, "output SVG")->required();
  vis->add_option("--results-dir", results_dir, "results root");

  std::string export_experiment, export_output;
  std::vector<std::string> export_models;
  auto* exp = app.add_subcommand("export", "merge per-model bundles of one experiment for the viewer");
  exp->add_option("-e,--experiment", export_experiment, "experiment name")->required();
  exp->add_option("-m,--models", export_models, "models to include")->delimiter(',')->required();
  exp->add_option("-o,--output", export_output, "output bundle.json")->required();
  exp->add_option("--results-dir", results_dir, "results root");

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "check a config file without running it");
  val->add_option("-c,--config", validate_path, "experiment config")->required();
  val->add_option("--config-dir", config_dir, "root of configs/<Model>/<experiment>.yaml");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 2;
  }

  if (run->parsed()) {
    if (!config_path.empty()) overrides.config_path = config_path;
    if (!dataset_name.empty()) overrides.dataset_name = dataset_name;
    if (!train_token.empty()) {
      overrides.train_flag = parse_bool_token(train_token);
      if (!overrides.train_flag) {
        err << "-train expects True or False, got '" << train_token << "'\n" << run->help();
        return 2;
      }
    }
    if (!overrides.config_path && !overrides.dataset_name) {
      err << "run needs -c CONFIG and/or -d DATASET\n" << run->help();
      return 2;
    }
    return run_command(overrides, config_dir, results_dir, data_dir, out, err);
  }

  try {
    if (vis->parsed()) {
      request.results_root = results_dir;
      request.save_path = save_path;
      if (!missingness_type.empty()) request.missingness_type = missingness_type;
      if (missingness_percent >= 0.0) request.missingness_percent = missingness_percent;
      const fs::path written = plot::visualize_standalone(request);
      out << "wrote " << written.string() << "\n";
      return 0;
    }
    if (exp->parsed()) {
      std::vector<bundle::Bundle> bundles;
      for (const auto& model : export_models) {
        const fs::path path = fs::path(results_dir) / export_experiment / model / "bundle.json";
        if (!fs::exists(path)) throw Error(ErrorKind::MissingResults, "no results for model " + model);
        bundles.push_back(bundle::read_bundle(path));
      }
      bundle::write_bundle(bundle::merge_bundles(bundles), export_output);
      out << "wrote " << export_output << "\n";
      return 0;
    }
    if (val->parsed()) {
      std::ifstream in(config::resolve_config_path(validate_path, config_dir));
      std::ostringstream ss;
      ss << in.rdbuf();
      const auto report = config::check_document(ss.str());
      if (report.violations.empty()) {
        out << "ok\n";
        return 0;
      }
      err << describe_all(report.violations);
      return 1;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace pulsekit::runner
