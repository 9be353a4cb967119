#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pulsekit/error.hpp"
#include "pulsekit/spectral.hpp"

using namespace pulsekit;

TEST_SUITE("spectral") {

TEST_CASE("forward transform agrees with the direct DFT for odd and even lengths") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const Eigen::Index n : {1, 2, 7, 12, 100, 127}) {
    Eigen::VectorXd x(n);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) xs[static_cast<std::size_t>(t)] = x(t) = gauss(rng);
    const Eigen::VectorXcd got = spectral::forward(x);
    const auto want = oracle::direct_dft(xs);
    for (Eigen::Index k = 0; k < n; ++k) {
      CHECK(std::abs(got(k) - want[static_cast<std::size_t>(k)]) < 1e-9);
    }
  }
}

TEST_CASE("inverse undoes forward") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x(90);
  for (auto& v : x) v = gauss(rng);
  const Eigen::VectorXcd back = spectral::inverse(spectral::forward(x));
  CHECK((back.real() - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(back.imag().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("strongest bins rank by magnitude and break ties toward the lower index") {
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(8);
  s(1) = 2.0;
  s(7) = 2.0;
  s(3) = 2.0;
  s(5) = 2.0;
  s(2) = 5.0;
  s(6) = 5.0;
  const auto bins = spectral::strongest_bins(s, 2);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0] == 2);
  CHECK(bins[1] == 1);
  CHECK_THROWS_AS(spectral::strongest_bins(s, 0), Error);
}

TEST_CASE("sparsify keeps conjugate partners and counts DC and Nyquist once") {
  const Eigen::Index n = 16;
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    x(t) = 3.0 + std::cos(std::numbers::pi * static_cast<double>(t)) +
           0.5 * std::sin(2.0 * std::numbers::pi * 3.0 * static_cast<double>(t) / n);
  }
  const Eigen::VectorXcd full = spectral::forward(x);
  const Eigen::VectorXcd two = spectral::sparsify(full, 2);
  CHECK(std::abs(two(0)) > 0);
  CHECK(std::abs(two(8)) > 0);
  CHECK(std::abs(two(3)) == 0.0);
  CHECK(std::abs(two(13)) == 0.0);
  const Eigen::VectorXcd three = spectral::sparsify(full, 3);
  CHECK(std::abs(three(3)) > 0);
  CHECK(std::abs(three(13)) > 0);
  CHECK((spectral::inverse(three).real() - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection of a top-k signal is the signal itself") {
  const Eigen::Index n = 64;
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    x(t) = std::sin(2.0 * std::numbers::pi * 4.0 * static_cast<double>(t) / n) +
           0.25 * std::cos(2.0 * std::numbers::pi * 9.0 * static_cast<double>(t) / n);
  }
  const Eigen::VectorXcd p = spectral::project(x, 2);
  CHECK((p.real() - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(p.imag().cwiseAbs().maxCoeff() < 1e-12);
}

}
