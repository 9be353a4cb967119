// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pulsekit/config.hpp"
#include "pulsekit/evaluation.hpp"
#include "pulsekit/imputers.hpp"
#include "pulsekit/missingness.hpp"
#include "pulsekit/spectral.hpp"
#include "support.hpp"

using namespace pulsekit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int number, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << number << ". " << std::left << std::setw(28) << name << " "
            << o.detail << " [" << std::fixed << std::setprecision(2) << secs << " s]" << std::endl;
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

int run_cli(const std::string& args, const fs::path& log) {
  fs::create_directories(log.parent_path());
  const std::string cmd = quote(PULSEKIT_CLI) + " " + args + " > " + quote(log) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<bool> row_mask(const Mask& m) {
  std::vector<bool> out(static_cast<std::size_t>(m.length()));
  for (Eigen::Index t = 0; t < m.length(); ++t) out[static_cast<std::size_t>(t)] = m.missing(0, t);
  return out;
}

// 1. Straight lines are reproduced exactly across interior gaps.
Outcome linear_exactness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> coef(-5.0, 5.0), slope(-0.05, 0.05), frac(0.10, 0.50);
  const Eigen::Index n = 1000;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = coef(rng), b = slope(rng);
    Signal v(1, n);
    for (Eigen::Index t = 0; t < n; ++t) v(0, t) = a + b * static_cast<double>(t);
    const auto len = static_cast<Eigen::Index>(std::llround(frac(rng) * static_cast<double>(n)));
    const Eigen::Index first = std::uniform_int_distribution<Eigen::Index>(1, n - len - 1)(rng);
    Mask mask = Mask::none(1, n);
    mask.missing.middleCols(first, len).setConstant(true);
    const auto r = imputers::impute_linear(make_masked(Sample{"aff", v}, mask));
    for (Eigen::Index t = first; t < first + len; ++t) {
      worst = std::max(worst, std::abs(r.imputed.values(0, t) - v(0, t)));
    }
  }
  const double secs = seconds_since(start);
  return {worst < 1e-12 && secs < 1.0, "max error " + sci(worst) + " (< 1e-12), " + sci(secs) + " s (< 1 s)"};
}

// 2. Two-tone recovery, cross-checked against the brute-force iteration.
Outcome spectral_recovery() {
  const auto start = Clock::now();
  const Eigen::Index n = 256;
  Signal v(1, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double tt = static_cast<double>(t);
    v(0, t) = std::sin(2 * std::numbers::pi * 5 * tt / 256) + 0.5 * std::sin(2 * std::numbers::pi * 12 * tt / 256);
  }
  double worst = 0.0, oracle_gap = 0.0;
  int max_iters_used = 0;
  bool all_converged = true, same_iterations = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MaskedSample m = missingness::apply_extended(Sample{"tone", v}, 0.10, seed);
    const auto r = imputers::impute_fft(m, {4, 100, 1e-6});
    std::vector<double> obs(m.observed.values.data(), m.observed.values.data() + n);
    const auto ref = oracle::brute_force_fft_impute(obs, row_mask(m.mask), 4, 1e-6, 100);
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!m.mask.missing(0, t)) continue;
      worst = std::max(worst, std::abs(r.imputed.values(0, t) - v(0, t)));
      oracle_gap = std::max(oracle_gap, std::abs(r.imputed.values(0, t) - ref.values[static_cast<std::size_t>(t)]));
    }
    all_converged = all_converged && r.converged.value_or(false) && ref.converged;
    same_iterations = same_iterations && r.iterations == ref.iterations;
    max_iters_used = std::max(max_iters_used, r.iterations.value_or(0));
  }
  const double secs = seconds_since(start);
  const bool pass = worst < 0.05 && all_converged && max_iters_used <= 100 && oracle_gap < 1e-9 && same_iterations &&
                    secs < 1.0;
  return {pass, "max error " + sci(worst) + " (< 0.05), converged " + (all_converged ? "yes" : "no") + " in <= " +
                    std::to_string(max_iters_used) + " iters, |impl - brute force| " + sci(oracle_gap) +
                    (same_iterations ? ", same iteration count" : ", iteration counts differ")};
}

// 3. Transform against the O(T^2) DFT.
Outcome dft_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(303);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (const Eigen::Index n : {8, 64, 255, 256}) {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd x(n);
      std::vector<double> xs(static_cast<std::size_t>(n));
      for (Eigen::Index t = 0; t < n; ++t) xs[static_cast<std::size_t>(t)] = x(t) = gauss(rng);
      const Eigen::VectorXcd got = spectral::forward(x);
      const auto want = oracle::direct_dft(xs);
      for (Eigen::Index k = 0; k < n; ++k) worst = std::max(worst, std::abs(got(k) - want[static_cast<std::size_t>(k)]));
    }
  }
  const double secs = seconds_since(start);
  return {worst < 1e-9 && secs < 5.0, "max |X - DFT| " + sci(worst) + " (< 1e-9) over 80 signals"};
}

// 4. Exact missing counts for extended and transient masks; MCAR counts
// against binomial bounds.
Outcome missingness_exactness() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<Eigen::Index> length(100, 2000);
  std::uniform_real_distribution<double> percent(0.05, 0.9);
  int extended_bad = 0, transient_bad = 0, mcar_outside = 0;
  double worst_z = 0.0, pooled_count = 0.0, pooled_mean = 0.0, pooled_var = 0.0;
  const std::int64_t max_gap = 50;
  const Eigen::Index mcar_length = 10000;
  const int draws = 200;
  for (int draw = 0; draw < draws; ++draw) {
    const Eigen::Index n = length(rng);
    const double p = percent(rng);
    const auto want = std::llround(p * static_cast<double>(n));
    const std::uint64_t seed = rng();
    missingness::Rng r1(seed), r2(seed + 1), r3(seed + 2);

    const Mask ext = missingness::extended_mask(1, n, p, false, r1);
    const auto ext_runs = missing_runs(Eigen::Array<bool, 1, Eigen::Dynamic>(ext.missing.row(0)));
    if (ext.count() != want || ext_runs.size() != 1) ++extended_bad;

    const Mask tr = missingness::transient_mask(1, n, p, max_gap, false, r2);
    const auto tr_runs = missing_runs(Eigen::Array<bool, 1, Eigen::Dynamic>(tr.missing.row(0)));
    const bool runs_ok = std::all_of(tr_runs.begin(), tr_runs.end(), [&](const auto& run) { return run.second <= max_gap; });
    if (tr.count() != want || !runs_ok) ++transient_bad;

    const Mask mc = missingness::mcar_mask(1, mcar_length, p, false, r3);
    const double mean = p * static_cast<double>(mcar_length);
    const double var = static_cast<double>(mcar_length) * p * (1.0 - p);
    const double z = (static_cast<double>(mc.count()) - mean) / std::sqrt(var);
    worst_z = std::max(worst_z, std::abs(z));
    if (std::abs(z) > 3.0) ++mcar_outside;
    pooled_count += static_cast<double>(mc.count());
    pooled_mean += mean;
    pooled_var += var;
  }
  // Each draw leaves its 3-sigma band with probability 0.0027, so about 0.5
  // of 200 correct draws are expected outside; more than 3 happens with
  // probability below 0.2%. The pooled count gets a plain 3-sigma test.
  const double pooled_z = (pooled_count - pooled_mean) / std::sqrt(pooled_var);
  const bool mcar_ok = mcar_outside <= 3 && std::abs(pooled_z) <= 3.0;
  return {extended_bad == 0 && transient_bad == 0 && mcar_ok,
          std::to_string(draws) + " draws: extended off " + std::to_string(extended_bad) + ", transient off " +
              std::to_string(transient_bad) + ", MCAR outside 3 sigma " + std::to_string(mcar_outside) +
              " (<= 3, max |z| " + sci(worst_z) + "), pooled |z| " + sci(std::abs(pooled_z)) + " (<= 3)"};
}

// 5. Same command twice, same bytes.
Outcome determinism(const fs::path& work) {
  const fs::path config = testing::kSourceDir / "configs/FFT/synthetic_extended.yaml";
  double slowest = 0.0;
  for (const char* tag : {"a", "b"}) {
    const auto start = Clock::now();
    const int code = run_cli("run -c " + quote(config) + " --results-dir " + quote(work / tag), work / "log.txt");
    slowest = std::max(slowest, seconds_since(start));
    if (code != 0) return {false, "pulsekit run exited " + std::to_string(code) + ": " + testing::slurp(work / "log.txt")};
  }
  const fs::path rel = "synthetic_extended/fft";
  const bool report_same = testing::slurp(work / "a" / rel / "report.json") == testing::slurp(work / "b" / rel / "report.json");
  const bool bundle_same = testing::slurp(work / "a" / rel / "bundle.json") == testing::slurp(work / "b" / rel / "bundle.json");
  return {report_same && bundle_same && slowest < 30.0,
          std::string("report.json ") + (report_same ? "identical" : "DIFFERS") + ", bundle.json " +
              (bundle_same ? "identical" : "DIFFERS") + ", slowest run " + sci(slowest) + " s (< 30 s)"};
}

// 6. fft < linear_interp < mean_fill on the bundled pulsative data.
Outcome method_ordering(const fs::path& work) {
  std::map<std::string, double> mse;
  for (const auto& [dir, model] : {std::pair{"FFT", "fft"}, {"LinearInterp", "linear_interp"}, {"MeanFill", "mean_fill"}}) {
    const fs::path config = testing::kSourceDir / "configs" / dir / "synthetic_extended.yaml";
    const ExperimentConfig c = config::load_config_file(config);
    if (c.data.missingness.type != "extended" || c.data.missingness.percent != 0.3 ||
        c.data.synthetic.n_samples.value_or(0) != 50 || c.data.synthetic.noise_std.value_or(-1) != 0.05) {
      return {false, config.string() + " does not describe the bundled 30% extended setting"};
    }
    const int code = run_cli("run -c " + quote(config) + " --results-dir " + quote(work), work / "log.txt");
    if (code != 0) return {false, model + std::string(" run exited ") + std::to_string(code)};
    const auto report = evaluation::report_from_json(testing::slurp(work / "synthetic_extended" / model / "report.json"));
    if (report.n_samples != 50) return {false, model + std::string(" scored ") + std::to_string(report.n_samples) + " samples"};
    mse[model] = report.aggregate.mse;
  }
  return {mse["fft"] < mse["linear_interp"] && mse["linear_interp"] < mse["mean_fill"],
          "MSE fft " + sci(mse["fft"]) + " < linear_interp " + sci(mse["linear_interp"]) + " < mean_fill " +
              sci(mse["mean_fill"])};
}

// 7. Config gauntlet.
std::vector<std::string> expected_kinds(const fs::path& file) {
  std::istringstream first(testing::slurp(file));
  std::string line;
  std::getline(first, line);
  const std::string tag = "# expect:";
  std::vector<std::string> kinds;
  if (line.rfind(tag, 0) != 0) return kinds;
  std::istringstream rest(line.substr(tag.size()));
  for (std::string k; std::getline(rest, k, ',');) {
    k.erase(0, k.find_first_not_of(' '));
    k.erase(k.find_last_not_of(' ') + 1);
    kinds.push_back(k);
  }
  std::sort(kinds.begin(), kinds.end());
  return kinds;
}

Outcome config_gauntlet() {
  int valid = 0, invalid = 0;
  std::string problems;
  for (const auto& e : fs::directory_iterator(testing::kFixtures / "config/valid")) {
    ++valid;
    const auto v = config::check_document(testing::slurp(e.path())).violations;
    if (!v.empty()) problems += " " + e.path().filename().string() + ": " + describe(v.front()) + ";";
  }
  for (const auto& e : fs::directory_iterator(testing::kFixtures / "config/invalid")) {
    ++invalid;
    const auto want = expected_kinds(e.path());
    std::vector<std::string> got;
    for (const auto& v : config::check_document(testing::slurp(e.path())).violations) got.emplace_back(to_string(v.kind));
    std::sort(got.begin(), got.end());
    if (want.empty() || got != want) problems += " " + e.path().filename().string() + " gave unexpected kinds;";
  }
  return {valid >= 8 && invalid >= 8 && problems.empty(),
          std::to_string(valid) + " valid, " + std::to_string(invalid) + " invalid fixtures" +
              (problems.empty() ? ", all as designated" : ":" + problems)};
}

// 8. pulsekit run -d <custom CSV dataset>.
Outcome single_command(const fs::path& work) {
  const fs::path results = work / "results";
  const int code = run_cli("run -d bedside_ppg --results-dir " + quote(results), work / "log.txt");
  const bool report = fs::exists(results / "default/fft/report.json");
  const bool bundle = fs::exists(results / "default/fft/bundle.json");
  return {code == 0 && report && bundle, "exit " + std::to_string(code) + ", report " + (report ? "written" : "MISSING") +
                                             ", bundle " + (bundle ? "written" : "MISSING")};
}

// 9. Observed points pass through bit-exactly; all-false masks are the identity.
Outcome observed_preservation() {
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<Eigen::Index> channels(1, 3), length(8, 400);
  std::uniform_int_distribution<int> mechanism(0, 2);
  std::uniform_real_distribution<double> percent(0.02, 0.6);

  struct Candidate {
    std::string label;
    std::unique_ptr<imputers::Imputer> imputer;
  };
  std::vector<Candidate> candidates;
  candidates.push_back({"mean_fill", imputers::registry_lookup("mean_fill")});
  candidates.push_back({"mean_fill(train)", imputers::registry_lookup("mean_fill", {{"scope", std::string("train")}})});
  candidates.push_back({"linear_interp", imputers::registry_lookup("linear_interp")});
  candidates.push_back({"fft", imputers::registry_lookup("fft")});

  int cases = 0, broken = 0;
  for (const auto& cand : candidates) {
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Index c = channels(rng), n = length(rng);
      const Sample s = testing::random_sample(rng, c, n, "p" + std::to_string(i));
      std::optional<imputers::FittedState> state;
      if (cand.imputer->needs_fit()) {
        SignalSet train;
        train.samples.push_back(testing::random_sample(rng, c, n));
        state = imputers::fit(*cand.imputer, train);
      }
      const std::uint64_t seed = rng();
      MaskedSample m;
      const double p = percent(rng);
      switch (mechanism(rng)) {
        case 0: m = missingness::apply_extended(s, std::max(p, 1.0 / static_cast<double>(n)), seed, true); break;
        case 1: m = missingness::apply_mcar_points(s, p, seed, true); break;
        default: m = missingness::apply_transient(s, std::max(p, 1.0 / static_cast<double>(n)), 5, seed, true); break;
      }
      // Keep at least two observed points per channel.
      for (Eigen::Index ch = 0; ch < c; ++ch) {
        if (n - m.mask.missing.row(ch).count() < 2) m.mask.missing(ch, 0) = m.mask.missing(ch, n - 1) = false;
      }
      m = make_masked(s, m.mask);

      const auto r = cand.imputer->impute(m, state);
      const auto id = cand.imputer->impute(make_masked(s, Mask::none(c, n)), state);
      bool ok = true;
      for (Eigen::Index ch = 0; ch < c; ++ch) {
        for (Eigen::Index t = 0; t < n; ++t) {
          if (!m.mask.missing(ch, t)) ok = ok && testing::bit_equal(r.imputed.values(ch, t), s.values(ch, t));
          ok = ok && testing::bit_equal(id.imputed.values(ch, t), s.values(ch, t));
        }
      }
      ++cases;
      if (!ok) ++broken;
    }
  }
  return {broken == 0, std::to_string(cases) + " cases over 4 imputer settings, " + std::to_string(broken) + " violations"};
}

}  // namespace

int main() {
  testing::TempDir work("acceptance");
  ::setenv("PULSEKIT_DATA_DIR", (testing::kFixtures / "data").c_str(), 1);

  criterion(1, "linear exactness", linear_exactness);
  criterion(2, "spectral recovery", spectral_recovery);
  criterion(3, "DFT oracle", dft_oracle);
  criterion(4, "missingness exactness", missingness_exactness);
  criterion(5, "determinism", [&] { return determinism(work / "determinism"); });
  criterion(6, "method ordering", [&] { return method_ordering(work / "ordering"); });
  criterion(7, "config gauntlet", config_gauntlet);
  criterion(8, "single-command workflow", [&] { return single_command(work / "single"); });
  criterion(9, "observed preservation", observed_preservation);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
