#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "advbench/metrics.h"

namespace advbench {

enum class TranscriberKind { ExternalCommand, Mock };

/// One speech-to-text engine. Loaded from a flat key=value file:
///
///   name=deepspeech
///   kind=external            # or: mock
///   command=deepspeech --model m.pbmm --audio {input}
///   timeout_s=120
///   dropout=0.25             # mock only, word dropout rate in [0, 1]
///   seed=7                   # mock only
struct TranscriberDescriptor {
  std::string name;
  TranscriberKind kind = TranscriberKind::Mock;
  std::string command_template;
  double timeout_s = 60.0;
  double mock_dropout = 0.0;
  std::uint64_t mock_seed = 0;

  static TranscriberDescriptor load(const std::filesystem::path& path);
  /// Throws ConfigInvalid on a broken descriptor.
  void validate() const;
};

/// Reference transcripts keyed by audio stem; the mock echoes these.
using FixtureMap = std::map<std::string, Transcript>;

class Transcriber {
 public:
  virtual ~Transcriber() = default;
  virtual const std::string& name() const = 0;
  /// Raw transcript text for the audio file. Implementations must be safe to
  /// call concurrently.
  virtual std::string transcribe(const std::filesystem::path& audio_path) const = 0;
};

class CommandTranscriber final : public Transcriber {
 public:
  explicit CommandTranscriber(TranscriberDescriptor desc);
  const std::string& name() const override { return desc_.name; }
  /// Throws CommandFailed on a non-zero exit and Timeout past timeout_s.
  std::string transcribe(const std::filesystem::path& audio_path) const override;

  /// The command line with `{input}` replaced by the shell-quoted path.
  std::string render_command(const std::filesystem::path& audio_path) const;

 private:
  TranscriberDescriptor desc_;
};

/// Returns the fixture transcript for the file stem, with each word dropped
/// independently at `mock_dropout`. The drop pattern depends only on the seed,
/// the file stem and the parent directory name.
class MockTranscriber final : public Transcriber {
 public:
  MockTranscriber(TranscriberDescriptor desc, FixtureMap fixtures);
  const std::string& name() const override { return desc_.name; }
  /// Throws MissingFixture when the stem has no reference.
  std::string transcribe(const std::filesystem::path& audio_path) const override;

 private:
  TranscriberDescriptor desc_;
  FixtureMap fixtures_;
};

std::unique_ptr<Transcriber> make_transcriber(const TranscriberDescriptor& desc, const FixtureMap& fixtures);

/// Reads a reference transcript. A leading pair of non-negative integers
/// (TIMIT's begin/end sample indices) is stripped before normalization.
/// Throws IoFailure or EmptyReference.
Transcript load_reference(const std::filesystem::path& path);

/// 64-bit FNV-1a, used to derive stable per-item seeds.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

}  // namespace advbench
