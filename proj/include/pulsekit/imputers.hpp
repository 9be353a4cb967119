#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pulsekit/error.hpp"
#include "pulsekit/experiment_config.hpp"
#include "pulsekit/signal.hpp"

namespace pulsekit::imputers {

/// Output of `fit`. An imputer that was never fit has no FittedState at all;
/// stateless imputers fit to a state with no means.
struct FittedState {
  std::string imputer;
  Eigen::VectorXd channel_means;

  bool operator==(const FittedState& other) const {
    return imputer == other.imputer && channel_means.size() == other.channel_means.size() &&
           channel_means == other.channel_means;
  }
};

void save_fitted_state(const FittedState& state, const std::filesystem::path& path);
FittedState load_fitted_state(const std::filesystem::path& path);

struct ImputationResult {
  std::string sample_id;
  std::string model_name;
  Sample imputed;
  std::optional<int> iterations;
  std::optional<bool> converged;
  double wall_time_s = 0.0;
};

enum class MeanScope { Sample, Train };

struct FftParams {
  Eigen::Index top_k = 10;
  int max_iters = 100;
  double tol = 1e-6;
};

// The three classical imputers as plain functions.

ImputationResult impute_mean(const MaskedSample& masked, MeanScope scope,
                             const std::optional<FittedState>& state = std::nullopt);
ImputationResult impute_linear(const MaskedSample& masked);
ImputationResult impute_fft(const MaskedSample& masked, const FftParams& params = {});

/// Generic imputer. Subclasses supply the forward pass and, optionally, a
/// fit; timing, shape checks and observed-position pass-through live here.
class Imputer {
 public:
  explicit Imputer(std::string name) : name_(std::move(name)) {}
  virtual ~Imputer() = default;

  const std::string& name() const { return name_; }

  /// Whether `impute` needs a FittedState produced by `fit`.
  virtual bool needs_fit() const { return false; }
  virtual FittedState fit(const SignalSet& train) const;

  ImputationResult impute(const MaskedSample& masked,
                          const std::optional<FittedState>& state = std::nullopt) const;

 protected:
  struct Forward {
    Signal values;
    std::optional<int> iterations;
    std::optional<bool> converged;
  };
  virtual Forward forward(const MaskedSample& masked,
                          const std::optional<FittedState>& state) const = 0;

 private:
  std::string name_;
};

using ImputerFactory = std::function<std::unique_ptr<Imputer>(const ParamMap&)>;
using ParamCheck = std::function<std::vector<Violation>(const ParamMap&)>;

/// Name → implementation. Custom imputers register a factory and,
/// optionally, a parameter check; without one any params are accepted.
class Registry {
 public:
  static Registry& instance();

  void add(const std::string& name, ImputerFactory factory, ParamCheck check = {});
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;
  /// Violations are reported under `model.params.<key>`.
  std::vector<Violation> check_params(const std::string& name, const ParamMap& params) const;
  std::unique_ptr<Imputer> create(const std::string& name, const ParamMap& params) const;

 private:
  Registry();
  struct Entry {
    ImputerFactory factory;
    ParamCheck check;
  };
  std::map<std::string, Entry> entries_;
};

/// Throws UnknownModel for unregistered names.
std::unique_ptr<Imputer> registry_lookup(const std::string& name, const ParamMap& params = {});

/// Throws EmptyDataset when the imputer needs training data and gets none.
FittedState fit(const Imputer& imputer, const SignalSet& train);

FftParams fft_params_from(const ParamMap& params);
MeanScope mean_scope_from(const ParamMap& params);

enum class FailurePolicy { Throw, Collect };

struct SampleFailure {
  std::size_t index;
  std::string sample_id;
  ErrorKind kind;
  std::string message;
};

struct BatchResult {
  /// Input order; failed samples are absent.
  std::vector<ImputationResult> results;
  std::vector<SampleFailure> failures;
};

/// Imputes in batches of `batch_size`; samples of one batch run
/// concurrently. Output is independent of `batch_size`.
BatchResult impute_batch(const Imputer& imputer, const std::optional<FittedState>& state,
                         std::span<const MaskedSample> masked, std::int64_t batch_size,
                         FailurePolicy policy = FailurePolicy::Throw);

}  // namespace pulsekit::imputers
