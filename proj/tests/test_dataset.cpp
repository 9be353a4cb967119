#include <doctest.h>

#include <cstring>
#include <set>

#include "pulsekit/dataset.hpp"
#include "support.hpp"

using namespace pulsekit;
using namespace pulsekit::dataset;

namespace {

DataConfig file_config(const std::filesystem::path& path, DataFormat format, std::int64_t channels,
                       std::int64_t window) {
  DataConfig c;
  c.dataset_name = "fixture";
  c.path = path.string();
  c.format = format;
  c.channels = channels;
  c.window_length = window;
  return c;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::SyntaxError;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("synthetic generation is deterministic in the seed") {
  SyntheticParams p;
  p.n_samples = 4;
  p.channels = 2;
  const SignalSet a = generate_synthetic(p);
  const SignalSet b = generate_synthetic(p);
  REQUIRE(a.size() == 4);
  CHECK(a.samples[0].id == "s00000");
  CHECK(a.channels() == 2);
  CHECK(a.window_length() == 1000);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a.samples[i].values == b.samples[i].values);
  p.seed = 1;
  CHECK(generate_synthetic(p).samples[0].values != a.samples[0].values);
}

TEST_CASE("synthetic pulses repeat at the configured rate") {
  SyntheticParams p;
  p.n_samples = 1;
  p.rate_jitter = 0.0;
  p.noise_std = 0.0;
  p.baseline_amplitude = 0.0;
  p.window_length = 1200;
  const Eigen::RowVectorXd x = generate_synthetic(p).samples[0].values.row(0);
  // Count upward crossings of half the peak height: 1.2 Hz over 12 s.
  int crossings = 0;
  for (Eigen::Index t = 1; t < x.size(); ++t) crossings += (x(t - 1) < 0.5 && x(t) >= 0.5);
  CHECK(crossings >= 14);
  CHECK(crossings <= 15);
}

TEST_CASE("bad generator parameters are rejected") {
  SyntheticParams p;
  p.n_samples = 0;
  CHECK(kind_of([&] { generate_synthetic(p); }) == ErrorKind::EmptyDataset);
  p = {};
  p.pulse_width_s = 0.5;
  CHECK(kind_of([&] { generate_synthetic(p); }) == ErrorKind::InvalidValue);
}

TEST_CASE("windowing drops the trailing remainder") {
  const Signal x = Signal::Random(2, 25);
  const auto w = window(x, 10, "rec_w");
  REQUIRE(w.size() == 2);
  CHECK(w[1].id == "rec_w1");
  CHECK(w[1].values == x.middleCols(10, 10));
  CHECK(kind_of([&] { window(x, 30); }) == ErrorKind::InvalidValue);
}

TEST_CASE("CSV cells that are empty or nan become source-missing") {
  testing::TempDir dir("csv");
  testing::spit(dir / "a.csv", "x,y\n1,2\n,4\n5,nan\n7,8\n");
  const SignalSet set = load_dataset(file_config(dir / "a.csv", DataFormat::Csv, 2, 2));
  REQUIRE(set.size() == 2);
  REQUIRE(set.has_source_missing());
  CHECK(set.source_missing[0](0, 1));
  CHECK(set.source_missing[1](1, 0));
  CHECK(set.samples[0].values(0, 1) == 0.0);
  CHECK(set.samples[1].values(0, 1) == 7.0);
  CHECK(set.channel_names == std::vector<std::string>{"x", "y"});
}

TEST_CASE("malformed CSV is a FormatError") {
  testing::TempDir dir("badcsv");
  testing::spit(dir / "a.csv", "1,2\n3,abc\n");
  CHECK(kind_of([&] { load_dataset(file_config(dir / "a.csv", DataFormat::Csv, 2, 1)); }) == ErrorKind::FormatError);
  testing::spit(dir / "b.csv", "1,2\n3\n");
  CHECK(kind_of([&] { load_dataset(file_config(dir / "b.csv", DataFormat::Csv, 2, 1)); }) == ErrorKind::FormatError);
  CHECK(kind_of([&] { load_dataset(file_config(dir / "none.csv", DataFormat::Csv, 2, 1)); }) == ErrorKind::IoError);
}

TEST_CASE("JSONL records read with null as missing") {
  testing::TempDir dir("jsonl");
  testing::spit(dir / "r.jsonl",
                "{\"id\": \"p1\", \"values\": [[1, 2, 3, 4], [5, null, 7, 8]]}\n"
                "{\"id\": \"p2\", \"values\": [[0, 0, 1, 1], [2, 2, 3, 3]]}\n");
  const SignalSet set = load_dataset(file_config(dir / "r.jsonl", DataFormat::Jsonl, 2, 4));
  REQUIRE(set.size() == 2);
  CHECK(set.samples[0].id == "p1_w0");
  CHECK(set.source_missing[0](1, 1));
  CHECK(set.samples[1].values(1, 3) == 3.0);
}

TEST_CASE("raw f32 round-trips through write_raw_f32") {
  testing::TempDir dir("raw");
  SyntheticParams p;
  p.n_samples = 3;
  p.channels = 2;
  p.window_length = 200;
  const SignalSet set = generate_synthetic(p);
  write_raw_f32(set, dir.path());
  DataConfig c = file_config(dir.path(), DataFormat::RawF32, 2, 200);
  const SignalSet back = load_dataset(c);
  REQUIRE(back.size() == 3);
  CHECK((back.samples[2].values - set.samples[2].values).cwiseAbs().maxCoeff() < 1e-6);

  DataConfig resolved;
  resolved.dataset_name = dir.path().filename().string();
  resolve_custom_dataset(resolved, dir.path().parent_path());
  CHECK(resolved.format == DataFormat::RawF32);
  CHECK(resolved.channels == 2);

  std::ofstream(dir / "data.f32", std::ios::binary | std::ios::app) << "xyz";
  CHECK(kind_of([&] { load_dataset(c); }) == ErrorKind::FormatError);
}

TEST_CASE("z-score gives zero mean and unit std per channel, skipping source-missing points") {
  SignalSet set;
  set.samples.push_back({"a", (Signal(2, 3) << 1, 2, 3, 10, 10, 10).finished()});
  set.samples.push_back({"b", (Signal(2, 3) << 4, 5, 6, 20, 0, 30).finished()});
  MissingMatrix none = MissingMatrix::Constant(2, 3, false);
  MissingMatrix one = none;
  one(1, 1) = true;
  set.source_missing = {none, one};
  const Normalized n = normalize_zscore(set);
  CHECK(n.stats.mean(0) == doctest::Approx(3.5));
  CHECK(n.stats.mean(1) == doctest::Approx(16.0));
  CHECK(n.stats.std(0) == doctest::Approx(std::sqrt(17.5 / 6.0)));
  CHECK(n.set.samples[1].values(1, 1) == 0.0);
  const double ch0 = n.set.samples[0].values.row(0).sum() + n.set.samples[1].values.row(0).sum();
  CHECK(ch0 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("constant channels cannot be normalized") {
  SignalSet set;
  set.samples.push_back({"a", Signal::Constant(1, 5, 3.0)});
  CHECK(kind_of([&] { normalize_zscore(set); }) == ErrorKind::DegenerateChannel);
}

TEST_CASE("split partitions the samples deterministically") {
  SyntheticParams p;
  p.n_samples = 20;
  p.window_length = 100;
  const SignalSet set = generate_synthetic(p);
  const SplitSets a = split(set, {0.6, 0.2, 0.2}, 3);
  const SplitSets b = split(set, {0.6, 0.2, 0.2}, 3);
  CHECK(a.train.size() == 12);
  CHECK(a.val.size() == 4);
  CHECK(a.test.size() == 4);
  std::set<std::string> ids;
  for (const auto* part : {&a.train, &a.val, &a.test})
    for (const auto& s : part->samples) ids.insert(s.id);
  CHECK(ids.size() == 20);
  for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test.samples[i].id == b.test.samples[i].id);
  CHECK(a.test.split_tag == SplitTag::Test);
}

TEST_CASE("custom CSV dataset directories are resolved by name") {
  DataConfig c;
  c.dataset_name = "bedside_ppg";
  resolve_custom_dataset(c, testing::kFixtures / "data");
  CHECK(c.format == DataFormat::Csv);
  CHECK(c.channels == 2);
  CHECK(c.sampling_rate_hz == 100.0);
  const SignalSet set = load_dataset(c);
  CHECK(set.size() == 5);  // 3200 + 2500 rows in windows of 1000
  CHECK(set.has_source_missing());

  c.dataset_name = "not_there";
  CHECK(kind_of([&] { resolve_custom_dataset(c, testing::kFixtures / "data"); }) == ErrorKind::IoError);
}

}
