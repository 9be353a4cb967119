#include "pulsekit/signal.hpp"

#include "pulsekit/error.hpp"

namespace pulsekit {

MaskedSample make_masked(const Sample& sample, Mask mask) {
  if (mask.channels() != sample.channels() || mask.length() != sample.length()) {
    throw Error(ErrorKind::InvalidValue, "mask shape does not match sample " + sample.id);
  }
  MaskedSample out{sample, std::move(mask), sample};
  out.observed.values = out.mask.missing.select(0.0, sample.values.array()).matrix();
  return out;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> missing_runs(
    const Eigen::Ref<const Eigen::Array<bool, 1, Eigen::Dynamic>>& row) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> runs;
  Eigen::Index t = 0;
  const Eigen::Index n = row.size();
  while (t < n) {
    if (!row(t)) {
      ++t;
      continue;
    }
    const Eigen::Index start = t;
    while (t < n && row(t)) ++t;
    runs.emplace_back(start, t - start);
  }
  return runs;
}

}  // namespace pulsekit
