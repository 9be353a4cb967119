#include "pulsekit/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;

namespace pulsekit::plot {

namespace {

constexpr double kWidth = 1000.0;
constexpr double kHeight = 380.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 180.0;  // legend column
constexpr double kTop = 40.0;
constexpr double kBottom = 40.0;
constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Frame {
  Eigen::Index x_range;
  double y_min;
  double y_max;

  double x(double t) const {
    const double span = std::max<double>(1.0, static_cast<double>(x_range - 1));
    return kLeft + (kWidth - kLeft - kRight) * t / span;
  }
  double y(double v) const {
    return kTop + (kHeight - kTop - kBottom) * (y_max - v) / (y_max - y_min);
  }
};

void polyline(std::ostringstream& svg, const Frame& f, Eigen::Index start,
              const std::vector<double>& values, Eigen::Index from, Eigen::Index to,
              const char* color, double width) {
  if (to - from < 1) return;
  svg << "    <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" points=\"";
  for (Eigen::Index t = from; t < to; ++t) {
    if (t > from) svg << ' ';
    svg << f.x(static_cast<double>(t)) << ',' << f.y(values[static_cast<std::size_t>(t - start)]);
  }
  svg << "\"/>\n";
}

}  // namespace

std::string render_svg(const bundle::Bundle& bundle, Eigen::Index sample_index, Eigen::Index x_range) {
  if (sample_index < 0 || sample_index >= static_cast<Eigen::Index>(bundle.samples.size())) {
    throw Error(ErrorKind::InvalidValue, "sample_index " + std::to_string(sample_index) + " out of range [0, " +
                                             std::to_string(bundle.samples.size()) + ")");
  }
  if (x_range < 1) throw Error(ErrorKind::InvalidValue, "x_range must be positive");
  const auto& s = bundle.samples[static_cast<std::size_t>(sample_index)];
  const Eigen::Index length = static_cast<Eigen::Index>(s.truth.size());
  x_range = std::min(x_range, length);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto extend = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (Eigen::Index t = 0; t < x_range; ++t) extend(s.truth[static_cast<std::size_t>(t)]);
  for (const auto& [_, segments] : s.imputations) {
    for (const auto& seg : segments) {
      for (std::size_t k = 0; k < seg.values.size(); ++k) {
        if (seg.start + static_cast<Eigen::Index>(k) < x_range) extend(seg.values[k]);
      }
    }
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  const Frame frame{x_range, lo - pad, hi + pad};

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "  <text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << escape(bundle.experiment) << " | sample " << escape(s.id) << " ch" << s.channel << " | "
      << escape(bundle.missingness_type) << ' ' << bundle.missingness_percent * 100.0 << "%</text>\n";
  svg << "  <rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
      << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"#999\"/>\n";

  for (const auto& [start, len] : s.missing_runs) {
    const Eigen::Index end = std::min(start + len, x_range);
    if (start >= x_range || end <= start) continue;
    const double x0 = frame.x(static_cast<double>(start) - 0.5);
    const double x1 = frame.x(static_cast<double>(end) - 0.5);
    svg << "  <rect class=\"missing-run\" x=\"" << std::max(kLeft, x0) << "\" y=\"" << kTop << "\" width=\""
        << std::min(kWidth - kRight, x1) - std::max(kLeft, x0) << "\" height=\"" << kHeight - kTop - kBottom
        << "\" fill=\"#f2c94c\" fill-opacity=\"0.3\"/>\n";
  }

  svg << "  <g class=\"series\" data-name=\"truth\">\n";
  polyline(svg, frame, 0, s.truth, 0, x_range, "black", 1.2);
  svg << "  </g>\n";

  std::size_t color = 0;
  for (const auto& model : bundle.models) {
    const char* stroke = kPalette[color++ % kPalette.size()];
    svg << "  <g class=\"series\" data-name=\"" << escape(model) << "\">\n";
    if (auto it = s.imputations.find(model); it != s.imputations.end()) {
      for (const auto& seg : it->second) {
        const Eigen::Index end = std::min(seg.start + static_cast<Eigen::Index>(seg.values.size()), x_range);
        polyline(svg, frame, seg.start, seg.values, seg.start, end, stroke, 1.5);
      }
    }
    svg << "  </g>\n";
  }

  // Legend
  double ly = kTop + 10.0;
  const double lx = kWidth - kRight + 15.0;
  auto legend_entry = [&](const std::string& label, const char* stroke) {
    svg << "  <line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20.0 << "\" y2=\"" << ly
        << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
    svg << "  <text class=\"legend\" x=\"" << lx + 26.0 << "\" y=\"" << ly + 4.0
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(label) << "</text>\n";
    ly += 18.0;
  };
  legend_entry("truth", "black");
  color = 0;
  for (const auto& model : bundle.models) {
    std::string label = model;
    if (auto it = s.metrics.find(model); it != s.metrics.end()) {
      std::ostringstream m;
      m << std::setprecision(3) << " (mse " << it->second.mse << ")";
      label += m.str();
    }
    legend_entry(label, kPalette[color++ % kPalette.size()]);
  }

  svg << "  <text x=\"" << kLeft << "\" y=\"" << kHeight - 12.0
      << "\" font-family=\"sans-serif\" font-size=\"11\">timestep 0 - " << x_range - 1 << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

fs::path visualize_standalone(const VisualizeRequest& request) {
  if (request.models.empty()) throw Error(ErrorKind::InvalidValue, "no models to plot");
  std::vector<bundle::Bundle> bundles;
  for (const auto& model : request.models) {
    const fs::path path = request.results_root / request.experiment / model / "bundle.json";
    if (!fs::exists(path)) {
      throw Error(ErrorKind::MissingResults, "no results for model " + model + " at " + path.string());
    }
    bundles.push_back(bundle::read_bundle(path));
  }
  const bundle::Bundle merged = bundle::merge_bundles(bundles);
  if (request.missingness_type && *request.missingness_type != merged.missingness_type) {
    throw Error(ErrorKind::InvalidValue, "experiment " + request.experiment + " used " +
                                             merged.missingness_type + " missingness, not " +
                                             *request.missingness_type);
  }
  if (request.missingness_percent &&
      std::abs(*request.missingness_percent - merged.missingness_percent) > 1e-9) {
    throw Error(ErrorKind::InvalidValue, "experiment " + request.experiment + " used missingness percent " +
                                             std::to_string(merged.missingness_percent));
  }
  const std::string svg = render_svg(merged, request.sample_index, request.x_range);
  if (request.save_path.has_parent_path()) fs::create_directories(request.save_path.parent_path());
  std::ofstream out(request.save_path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + request.save_path.string());
  out << svg;
  return request.save_path;
}

}  // namespace pulsekit::plot
