#include "pulsekit/imputers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include "pulsekit/spectral.hpp"

namespace fs = std::filesystem;

namespace pulsekit::imputers {

namespace {

constexpr std::string_view kMeanFill = "mean_fill";
constexpr std::string_view kLinearInterp = "linear_interp";
constexpr std::string_view kFft = "fft";
constexpr char kStateMagic[8] = {'P', 'K', 'F', 'S', '0', '0', '0', '1'};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_shape(const MaskedSample& masked) {
  if (masked.mask.channels() != masked.observed.channels() ||
      masked.mask.length() != masked.observed.length()) {
    throw Error(ErrorKind::InvalidValue, "mask shape does not match sample " + masked.id());
  }
}

/// Throws unless channel `c` keeps at least `needed` observed points.
Eigen::Index require_observed(const MaskedSample& masked, Eigen::Index c, Eigen::Index needed) {
  const Eigen::Index observed = masked.mask.length() - masked.mask.missing.row(c).count();
  if (observed == 0) {
    throw Error(ErrorKind::ChannelFullyMissing,
                "sample " + masked.id() + " channel " + std::to_string(c) + " has no observed points");
  }
  if (observed < needed) {
    throw Error(ErrorKind::InsufficientObserved,
                "sample " + masked.id() + " channel " + std::to_string(c) + " has " +
                    std::to_string(observed) + " observed points, needs " + std::to_string(needed));
  }
  return observed;
}

double observed_mean(const MaskedSample& masked, Eigen::Index c) {
  const auto observed = (!masked.mask.missing.row(c)).eval();
  return observed.select(masked.observed.values.row(c).array(), 0.0).sum() /
         static_cast<double>(observed.count());
}

ImputationResult make_result(const MaskedSample& masked, std::string_view model, Signal values,
                             Clock::time_point start) {
  ImputationResult r;
  r.sample_id = masked.id();
  r.model_name = std::string(model);
  r.imputed = Sample{masked.id(), std::move(values)};
  r.wall_time_s = seconds_since(start);
  return r;
}

std::optional<double> as_number(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

std::optional<std::string> as_string(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return std::nullopt;
}

std::string param_path(const std::string& key) { return "model.params." + key; }

std::vector<Violation> check_fft_params(const ParamMap& params) {
  std::vector<Violation> out;
  for (const auto& [key, value] : params) {
    const auto number = as_number(value);
    if (key == "top_k" || key == "max_iters") {
      if (!number || *number < 1 || std::floor(*number) != *number) {
        out.push_back({ErrorKind::InvalidValue, param_path(key), "must be a positive integer"});
      }
    } else if (key == "tol") {
      if (!number || !(*number > 0) || !std::isfinite(*number)) {
        out.push_back({ErrorKind::InvalidValue, param_path(key), "must be a positive real"});
      }
    } else {
      out.push_back({ErrorKind::UnknownField, param_path(key), "not a parameter of fft"});
    }
  }
  return out;
}

std::vector<Violation> check_mean_params(const ParamMap& params) {
  std::vector<Violation> out;
  for (const auto& [key, value] : params) {
    if (key == "scope") {
      const auto s = as_string(value);
      if (!s || (*s != "sample" && *s != "train")) {
        out.push_back({ErrorKind::InvalidValue, param_path(key), "must be 'sample' or 'train'"});
      }
    } else {
      out.push_back({ErrorKind::UnknownField, param_path(key), "not a parameter of mean_fill"});
    }
  }
  return out;
}

std::vector<Violation> check_linear_params(const ParamMap& params) {
  std::vector<Violation> out;
  for (const auto& [key, value] : params) {
    if (key == "edge_mode") {
      if (as_string(value) != "hold") {
        out.push_back({ErrorKind::InvalidValue, param_path(key), "must be 'hold'"});
      }
    } else {
      out.push_back({ErrorKind::UnknownField, param_path(key), "not a parameter of linear_interp"});
    }
  }
  return out;
}

void throw_on(const std::vector<Violation>& violations) {
  if (!violations.empty()) throw ConfigError(violations);
}

class MeanFillImputer final : public Imputer {
 public:
  explicit MeanFillImputer(MeanScope scope) : Imputer(std::string(kMeanFill)), scope_(scope) {}

  bool needs_fit() const override { return scope_ == MeanScope::Train; }

  FittedState fit(const SignalSet& train) const override {
    FittedState state{name(), {}};
    if (scope_ != MeanScope::Train) return state;
    if (train.empty()) throw Error(ErrorKind::EmptyDataset, "mean_fill: empty training set");
    const Eigen::Index channels = train.channels();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(channels);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(channels);
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto& v = train.samples[i].values;
      if (train.has_source_missing()) {
        const MissingMatrix observed = !train.source_missing[i];
        sum += observed.select(v.array(), 0.0).matrix().rowwise().sum();
        count += observed.cast<double>().matrix().rowwise().sum();
      } else {
        sum += v.rowwise().sum();
        count.array() += static_cast<double>(v.cols());
      }
    }
    if ((count.array() == 0).any()) {
      throw Error(ErrorKind::EmptyDataset, "mean_fill: a channel has no training values");
    }
    state.channel_means = sum.cwiseQuotient(count);
    return state;
  }

 protected:
  Forward forward(const MaskedSample& masked, const std::optional<FittedState>& state) const override {
    return {impute_mean(masked, scope_, state).imputed.values, std::nullopt, std::nullopt};
  }

 private:
  MeanScope scope_;
};

class LinearInterpImputer final : public Imputer {
 public:
  LinearInterpImputer() : Imputer(std::string(kLinearInterp)) {}

 protected:
  Forward forward(const MaskedSample& masked, const std::optional<FittedState>&) const override {
    return {impute_linear(masked).imputed.values, std::nullopt, std::nullopt};
  }
};

class FftImputer final : public Imputer {
 public:
  explicit FftImputer(FftParams params) : Imputer(std::string(kFft)), params_(params) {}

 protected:
  Forward forward(const MaskedSample& masked, const std::optional<FittedState>&) const override {
    auto r = impute_fft(masked, params_);
    return {std::move(r.imputed.values), r.iterations, r.converged};
  }

 private:
  FftParams params_;
};

}  // namespace

FftParams fft_params_from(const ParamMap& params) {
  throw_on(check_fft_params(params));
  FftParams p;
  if (auto it = params.find("top_k"); it != params.end()) p.top_k = static_cast<Eigen::Index>(std::get<double>(it->second));
  if (auto it = params.find("max_iters"); it != params.end()) p.max_iters = static_cast<int>(std::get<double>(it->second));
  if (auto it = params.find("tol"); it != params.end()) p.tol = std::get<double>(it->second);
  return p;
}

MeanScope mean_scope_from(const ParamMap& params) {
  throw_on(check_mean_params(params));
  if (auto it = params.find("scope"); it != params.end() && std::get<std::string>(it->second) == "train") {
    return MeanScope::Train;
  }
  return MeanScope::Sample;
}

ImputationResult impute_mean(const MaskedSample& masked, MeanScope scope,
                             const std::optional<FittedState>& state) {
  const auto start = Clock::now();
  require_shape(masked);
  const Eigen::Index channels = masked.observed.channels();
  Eigen::VectorXd fill(channels);
  if (scope == MeanScope::Train) {
    if (!state || state->channel_means.size() != channels) {
      throw Error(ErrorKind::MissingFitState, "mean_fill with scope=train needs per-channel training means");
    }
    fill = state->channel_means;
  } else {
    for (Eigen::Index c = 0; c < channels; ++c) {
      require_observed(masked, c, 1);
      fill(c) = observed_mean(masked, c);
    }
  }
  Signal out = masked.observed.values;
  for (Eigen::Index c = 0; c < channels; ++c) {
    out.row(c) = masked.mask.missing.row(c).select(fill(c), out.row(c).array()).matrix();
  }
  return make_result(masked, kMeanFill, std::move(out), start);
}

ImputationResult impute_linear(const MaskedSample& masked) {
  const auto start = Clock::now();
  require_shape(masked);
  Signal out = masked.observed.values;
  const Eigen::Index length = out.cols();
  for (Eigen::Index c = 0; c < out.rows(); ++c) {
    require_observed(masked, c, 2);
    const Eigen::Array<bool, 1, Eigen::Dynamic> row = masked.mask.missing.row(c);
    for (const auto& [run_start, run_length] : missing_runs(row)) {
      const Eigen::Index left = run_start - 1;
      const Eigen::Index right = run_start + run_length;
      for (Eigen::Index k = run_start; k < right; ++k) {
        if (left < 0) {
          out(c, k) = out(c, right);
        } else if (right >= length) {
          out(c, k) = out(c, left);
        } else {
          const double l = out(c, left);
          const double r = out(c, right);
          out(c, k) = l + (r - l) * static_cast<double>(k - left) / static_cast<double>(right - left);
        }
      }
    }
  }
  return make_result(masked, kLinearInterp, std::move(out), start);
}

ImputationResult impute_fft(const MaskedSample& masked, const FftParams& params) {
  const auto start = Clock::now();
  require_shape(masked);
  if (params.top_k < 1) throw Error(ErrorKind::InvalidValue, "fft: top_k must be positive");
  if (params.max_iters < 1) throw Error(ErrorKind::InvalidValue, "fft: max_iters must be positive");
  if (!(params.tol > 0)) throw Error(ErrorKind::InvalidValue, "fft: tol must be positive");
  if (masked.observed.length() < 8) {
    throw Error(ErrorKind::InvalidValue, "fft: window_length must be at least 8");
  }

  Signal out = masked.observed.values;
  int iterations = 1;
  bool converged = true;
  for (Eigen::Index c = 0; c < out.rows(); ++c) {
    require_observed(masked, c, 2);
    const Eigen::Array<bool, Eigen::Dynamic, 1> missing = masked.mask.missing.row(c).transpose();
    if (!missing.any()) continue;

    Eigen::VectorXd x = out.row(c).transpose();
    x = missing.select(observed_mean(masked, c), x.array()).matrix();
    int it = 0;
    bool channel_converged = false;
    while (it < params.max_iters) {
      ++it;
      const Eigen::VectorXd r = spectral::project(x, params.top_k).real();
      const double delta = missing.select((r - x).array().abs(), 0.0).maxCoeff();
      x = missing.select(r.array(), x.array()).matrix();
      if (!std::isfinite(delta)) break;
      if (delta < params.tol) {
        channel_converged = true;
        break;
      }
    }
    out.row(c) = x.transpose();
    iterations = std::max(iterations, it);
    converged = converged && channel_converged;
  }
  auto result = make_result(masked, kFft, std::move(out), start);
  result.iterations = iterations;
  result.converged = converged;
  return result;
}

FittedState Imputer::fit(const SignalSet&) const { return FittedState{name_, {}}; }

ImputationResult Imputer::impute(const MaskedSample& masked,
                                 const std::optional<FittedState>& state) const {
  const auto start = Clock::now();
  require_shape(masked);
  if (needs_fit() && !state) {
    throw Error(ErrorKind::MissingFitState, name_ + " must be fit before imputing");
  }
  Forward f = forward(masked, state);
  if (f.values.rows() != masked.observed.channels() || f.values.cols() != masked.observed.length()) {
    throw Error(ErrorKind::InvalidValue, name_ + " returned a " + std::to_string(f.values.rows()) +
                                             "x" + std::to_string(f.values.cols()) +
                                             " imputation for sample " + masked.id());
  }
  ImputationResult r;
  r.sample_id = masked.id();
  r.model_name = name_;
  r.imputed = Sample{masked.id(), masked.mask.missing.select(f.values.array(),
                                                             masked.observed.values.array()).matrix()};
  r.iterations = f.iterations;
  r.converged = f.converged;
  r.wall_time_s = seconds_since(start);
  return r;
}

Registry::Registry() {
  entries_[std::string(kMeanFill)] = {
      [](const ParamMap& p) { return std::make_unique<MeanFillImputer>(mean_scope_from(p)); },
      check_mean_params};
  entries_[std::string(kLinearInterp)] = {
      [](const ParamMap& p) {
        throw_on(check_linear_params(p));
        return std::make_unique<LinearInterpImputer>();
      },
      check_linear_params};
  entries_[std::string(kFft)] = {
      [](const ParamMap& p) { return std::make_unique<FftImputer>(fft_params_from(p)); },
      check_fft_params};
}

Registry& Registry::instance() {
  static Registry registry;
  return registry;
}

void Registry::add(const std::string& name, ImputerFactory factory, ParamCheck check) {
  entries_[name] = {std::move(factory), std::move(check)};
}

bool Registry::contains(const std::string& name) const { return entries_.count(name) > 0; }

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::vector<Violation> Registry::check_params(const std::string& name, const ParamMap& params) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) return {{ErrorKind::UnknownModel, name, "no imputer registered under this name"}};
  if (!it->second.check) return {};
  return it->second.check(params);
}

std::unique_ptr<Imputer> Registry::create(const std::string& name, const ParamMap& params) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw Error(ErrorKind::UnknownModel, "no imputer named '" + name + "'");
  return it->second.factory(params);
}

std::unique_ptr<Imputer> registry_lookup(const std::string& name, const ParamMap& params) {
  return Registry::instance().create(name, params);
}

FittedState fit(const Imputer& imputer, const SignalSet& train) {
  if (imputer.needs_fit() && train.empty()) {
    throw Error(ErrorKind::EmptyDataset, imputer.name() + ": cannot fit on an empty training set");
  }
  return imputer.fit(train);
}

BatchResult impute_batch(const Imputer& imputer, const std::optional<FittedState>& state,
                         std::span<const MaskedSample> masked, std::int64_t batch_size,
                         FailurePolicy policy) {
  if (batch_size < 1) throw Error(ErrorKind::InvalidValue, "batch_size must be at least 1");
  BatchResult out;
  out.results.reserve(masked.size());

  using Outcome = std::variant<ImputationResult, SampleFailure>;
  auto run_one = [&](std::size_t i) -> Outcome {
    try {
      return imputer.impute(masked[i], state);
    } catch (const Error& e) {
      return SampleFailure{i, masked[i].id(), e.kind(), e.what()};
    }
  };

  const auto step = static_cast<std::size_t>(batch_size);
  for (std::size_t begin = 0; begin < masked.size(); begin += step) {
    const std::size_t end = std::min(masked.size(), begin + step);
    std::vector<std::future<Outcome>> pending;
    pending.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(end - begin > 1 ? std::launch::async : std::launch::deferred, run_one, i));
    }
    for (auto& f : pending) {
      Outcome o = f.get();
      if (auto* r = std::get_if<ImputationResult>(&o)) {
        out.results.push_back(std::move(*r));
      } else {
        out.failures.push_back(std::get<SampleFailure>(std::move(o)));
      }
    }
    if (policy == FailurePolicy::Throw && !out.failures.empty()) {
      const auto& f = out.failures.front();
      throw Error(f.kind, "sample " + f.sample_id + ": " + f.message);
    }
  }
  return out;
}

void save_fitted_state(const FittedState& state, const fs::path& path) {
  std::string bytes(kStateMagic, sizeof kStateMagic);
  auto put_u64 = [&](std::uint64_t v) {
    for (int shift = 0; shift < 64; shift += 8) bytes.push_back(static_cast<char>((v >> shift) & 0xFFu));
  };
  put_u64(state.imputer.size());
  bytes += state.imputer;
  put_u64(static_cast<std::uint64_t>(state.channel_means.size()));
  for (Eigen::Index i = 0; i < state.channel_means.size(); ++i) {
    put_u64(std::bit_cast<std::uint64_t>(state.channel_means(i)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FittedState load_fitted_state(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > bytes.size()) throw Error(ErrorKind::FormatError, path.string() + ": truncated fitted state");
  };
  auto get_u64 = [&] {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + k])) << (8 * k);
    pos += 8;
    return v;
  };
  need(sizeof kStateMagic);
  if (bytes.compare(0, sizeof kStateMagic, kStateMagic, sizeof kStateMagic) != 0) {
    throw Error(ErrorKind::FormatError, path.string() + ": not a fitted state file");
  }
  pos = sizeof kStateMagic;
  FittedState state;
  const auto name_len = get_u64();
  need(name_len);
  state.imputer = bytes.substr(pos, name_len);
  pos += name_len;
  const auto n = get_u64();
  state.channel_means.resize(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) state.channel_means(static_cast<Eigen::Index>(i)) = std::bit_cast<double>(get_u64());
  return state;
}

}  // namespace pulsekit::imputers
