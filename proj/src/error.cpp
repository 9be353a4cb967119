#include "pulsekit/error.hpp"

namespace pulsekit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::MissingSection: return "MissingSection";
    case ErrorKind::UnknownField: return "UnknownField";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::UnknownModel: return "UnknownModel";
    case ErrorKind::UnknownMissingness: return "UnknownMissingness";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DegenerateChannel: return "DegenerateChannel";
    case ErrorKind::ChannelFullyMissing: return "ChannelFullyMissing";
    case ErrorKind::InsufficientObserved: return "InsufficientObserved";
    case ErrorKind::MissingFitState: return "MissingFitState";
    case ErrorKind::PlacementFailure: return "PlacementFailure";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::AlignmentError: return "AlignmentError";
    case ErrorKind::MissingResults: return "MissingResults";
    case ErrorKind::SampleFailed: return "SampleFailed";
  }
  return "Unknown";
}

std::string describe(const Violation& v) {
  std::string s(to_string(v.kind));
  s += "(" + v.path + ")";
  if (!v.reason.empty()) s += ": " + v.reason;
  return s;
}

namespace {

std::string join(const std::vector<Violation>& violations) {
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += describe(v);
  }
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorKind::InvalidValue : violations.front().kind,
            join(violations)),
      violations_(std::move(violations)) {}

}  // namespace pulsekit
