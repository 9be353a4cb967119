#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pulsekit {

enum class ErrorKind {
  SyntaxError,
  MissingSection,
  UnknownField,
  InvalidValue,
  UnknownModel,
  UnknownMissingness,
  IoError,
  FormatError,
  EmptyDataset,
  DegenerateChannel,
  ChannelFullyMissing,
  InsufficientObserved,
  MissingFitState,
  PlacementFailure,
  EmptyMask,
  AlignmentError,
  MissingResults,
  SampleFailed,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A configuration problem. `path` is the dotted location in the document
/// (e.g. "data.missingness.percent"), or the offending name for registry misses.
struct Violation {
  ErrorKind kind;
  std::string path;
  std::string reason;

  bool operator==(const Violation&) const = default;
};

std::string describe(const Violation& v);

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace pulsekit
