#include "pulsekit/spectral.hpp"

#include <algorithm>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "pulsekit/error.hpp"

namespace pulsekit::spectral {

Eigen::VectorXcd forward(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::VectorXcd in = x.cast<std::complex<double>>();
  if (in.size() < 2) return in;
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out;
  fft.fwd(out, in);
  return out;
}

Eigen::VectorXcd inverse(const Eigen::Ref<const Eigen::VectorXcd>& spectrum) {
  const Eigen::VectorXcd in = spectrum;
  if (in.size() < 2) return in;
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out;
  fft.inv(out, in);
  return out;
}

std::vector<Eigen::Index> strongest_bins(const Eigen::Ref<const Eigen::VectorXcd>& spectrum,
                                         Eigen::Index top_k) {
  if (top_k < 1) throw Error(ErrorKind::InvalidValue, "top_k must be positive");
  const Eigen::Index half = spectrum.size() / 2;
  std::vector<Eigen::Index> bins(static_cast<std::size_t>(half + 1));
  std::iota(bins.begin(), bins.end(), Eigen::Index{0});
  const Eigen::VectorXd magnitude = spectrum.head(half + 1).cwiseAbs();
  const auto keep = std::min<Eigen::Index>(top_k, half + 1);
  std::partial_sort(bins.begin(), bins.begin() + keep, bins.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      if (magnitude(a) != magnitude(b)) return magnitude(a) > magnitude(b);
                      return a < b;
                    });
  bins.resize(static_cast<std::size_t>(keep));
  return bins;
}

Eigen::VectorXcd sparsify(const Eigen::Ref<const Eigen::VectorXcd>& spectrum, Eigen::Index top_k) {
  const Eigen::Index n = spectrum.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (const Eigen::Index k : strongest_bins(spectrum, top_k)) {
    out(k) = spectrum(k);
    const Eigen::Index partner = (n - k) % n;
    out(partner) = spectrum(partner);
  }
  return out;
}

Eigen::VectorXcd project(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index top_k) {
  return inverse(sparsify(forward(x), top_k));
}

}  // namespace pulsekit::spectral
