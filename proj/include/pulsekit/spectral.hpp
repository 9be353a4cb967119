#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace pulsekit::spectral {

/// Unnormalized forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N), for any N.
Eigen::VectorXcd forward(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Inverse of `forward` (carries the 1/N factor).
Eigen::VectorXcd inverse(const Eigen::Ref<const Eigen::VectorXcd>& spectrum);

/// Bins of the canonical half-spectrum [0, N/2] kept by a top-k selection:
/// ranked by magnitude, ties to the lower index. Each entry stands for the
/// bin and its conjugate partner, so DC and Nyquist count once.
std::vector<Eigen::Index> strongest_bins(const Eigen::Ref<const Eigen::VectorXcd>& spectrum,
                                         Eigen::Index top_k);

/// Zeroes every bin outside `strongest_bins` and its conjugate partners.
Eigen::VectorXcd sparsify(const Eigen::Ref<const Eigen::VectorXcd>& spectrum, Eigen::Index top_k);

/// Inverse transform of the top-k sparsified spectrum of `x`. The imaginary
/// part is round-off only.
Eigen::VectorXcd project(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index top_k);

}  // namespace pulsekit::spectral
