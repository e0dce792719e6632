#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace advbench {

enum class ErrorKind {
  // audio-io
  MalformedHeader,
  UnsupportedFormat,
  IoFailure,
  // attack-gen
  RateMismatch,
  InvalidArgument,
  // dsp
  NotPowerOfTwo,
  SignalTooShort,
  // metrics
  EmptyReference,
  SilentSignal,
  EmptyInput,
  // transcribers
  CommandFailed,
  Timeout,
  MissingFixture,
  // harness
  EmptyCorpus,
  ConfigInvalid,
  // annotation
  DuplicateAnnotator,
  UnknownCondition,
  UnknownAnnotator,
  NotAssigned,
  NoRecords,
};

std::string_view to_string(ErrorKind kind);

/// Every failure the library reports carries one of the kinds above so
/// callers (CLI exit codes, HTTP status mapping, harness error cells) can
/// dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace advbench
