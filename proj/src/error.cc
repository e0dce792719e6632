#include "advbench/error.h"

namespace advbench {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::RateMismatch: return "RateMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotPowerOfTwo: return "NotPowerOfTwo";
    case ErrorKind::SignalTooShort: return "SignalTooShort";
    case ErrorKind::EmptyReference: return "EmptyReference";
    case ErrorKind::SilentSignal: return "SilentSignal";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::CommandFailed: return "CommandFailed";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::MissingFixture: return "MissingFixture";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::DuplicateAnnotator: return "DuplicateAnnotator";
    case ErrorKind::UnknownCondition: return "UnknownCondition";
    case ErrorKind::UnknownAnnotator: return "UnknownAnnotator";
    case ErrorKind::NotAssigned: return "NotAssigned";
    case ErrorKind::NoRecords: return "NoRecords";
  }
  return "Unknown";
}

}  // namespace advbench
