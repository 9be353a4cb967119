#include <doctest.h>

#include <limits>

#include "pulsekit/evaluation.hpp"

using namespace pulsekit;
using namespace pulsekit::evaluation;

TEST_SUITE("evaluation") {

TEST_CASE("metrics average over missing positions only") {
  Eigen::MatrixXd truth(1, 5), imputed(1, 5);
  truth << 1, 2, 3, 4, 5;
  imputed << 100, 4, 3, 1, -5;
  Eigen::Array<bool, 1, 5> missing;
  missing << false, true, true, true, false;
  const auto mse = mse_missing(truth, imputed, missing);
  CHECK(mse.n_missing == 3);
  CHECK(mse.value == doctest::Approx((4.0 + 0.0 + 9.0) / 3.0));
  CHECK(mae_missing(truth, imputed, missing).value == doctest::Approx((2.0 + 0.0 + 3.0) / 3.0));
}

TEST_CASE("non-finite values at observed positions do not leak into the metric") {
  Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(2, 3);
  Eigen::MatrixXd imputed = Eigen::MatrixXd::Ones(2, 3);
  imputed(0, 0) = std::numeric_limits<double>::infinity();
  imputed(1, 2) = std::numeric_limits<double>::quiet_NaN();
  Eigen::Array<bool, 2, 3> missing = Eigen::Array<bool, 2, 3>::Constant(false);
  missing(0, 1) = missing(1, 1) = true;
  CHECK(mse_missing(truth, imputed, missing).value == 1.0);
}

TEST_CASE("metrics reject empty masks and mismatched shapes") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 4);
  const Eigen::Array<bool, 1, 4> none = Eigen::Array<bool, 1, 4>::Constant(false);
  try {
    mse_missing(a, a, none);
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyMask);
  }
  const Eigen::MatrixXd b = Eigen::MatrixXd::Zero(1, 5);
  CHECK_THROWS_AS(mae_missing(a, b, none), Error);
}

TEST_CASE("aggregate weights samples by their missing counts") {
  const std::vector<SampleScore> scores = {{"a", 1.0, 1.0, 10}, {"b", 4.0, 2.0, 30}};
  const auto report = aggregate(scores, {"exp", "fft", "abc", 9});
  CHECK(report.aggregate.mse == doctest::Approx((10.0 + 120.0) / 40.0));
  CHECK(report.aggregate.mae == doctest::Approx((10.0 + 60.0) / 40.0));
  CHECK(report.aggregate.n_missing == 40);
  CHECK(report.n_samples == 2);
  CHECK_THROWS_AS(aggregate(std::vector<SampleScore>{}), Error);
}

TEST_CASE("report JSON round-trips exactly and has a fixed key order") {
  const std::vector<SampleScore> scores = {{"a", 0.1, 0.2, 3}, {"b", 1.0 / 3.0, 0.7, 5}};
  const auto report = aggregate(scores, {"exp", "linear_interp", "deadbeef", 12});
  const std::string text = to_json(report);
  CHECK(text.find("\"experiment_name\"") < text.find("\"aggregate\""));
  const auto back = report_from_json(text);
  CHECK(back.aggregate.mse == report.aggregate.mse);
  CHECK(back.per_sample[1].mse == report.per_sample[1].mse);
  CHECK(back.config_digest == "deadbeef");
  CHECK(to_json(back) == text);
  CHECK_THROWS_AS(report_from_json("{}"), Error);
}

}
