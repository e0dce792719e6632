#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace advbench {

/// Mono waveform. Samples are nominally in [-1, 1]; the constructor enforces
/// a positive rate but leaves range checking to the producers (readers clamp
/// by construction, overlay clamps, gain is allowed to overshoot transiently).
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(std::vector<double> samples, int sample_rate_hz, std::string source_id = {});

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  const std::string& source_id() const noexcept { return source_id_; }

  double operator[](std::size_t i) const { return samples_[i]; }

  /// True when every sample lies in [-1, 1] and is finite.
  bool in_range() const noexcept;

  double duration_seconds() const noexcept;

 private:
  std::vector<double> samples_;
  int sample_rate_hz_ = 16000;
  std::string source_id_;
};

inline double duration_seconds(const AudioBuffer& buf) { return buf.duration_seconds(); }

// Sample conversion. Reads divide by 32768; writes multiply by 32768, round
// half away from zero and clamp to the int16 range.
double pcm16_to_sample(std::int16_t v) noexcept;
std::int16_t sample_to_pcm16(double s) noexcept;

/// Parses a RIFF/WAVE PCM16 mono little-endian image. Unknown chunks are
/// skipped. `source_id` is attached to the result verbatim.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes, std::string source_id = {});

/// Canonical 44-byte-header PCM16 mono image ("fmt " + "data" only).
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf);

AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const AudioBuffer& buf, const std::filesystem::path& path);

}  // namespace advbench
