#include "advbench/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "advbench/error.h"

namespace advbench {

namespace {

constexpr std::uint16_t kFormatPcm = 1;

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate_hz, std::string source_id)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), source_id_(std::move(source_id)) {
  if (sample_rate_hz_ <= 0) {
    throw Error(ErrorKind::InvalidArgument,
                "sample rate must be positive, got " + std::to_string(sample_rate_hz_));
  }
}

bool AudioBuffer::in_range() const noexcept {
  return std::all_of(samples_.begin(), samples_.end(),
                     [](double s) { return std::isfinite(s) && s >= -1.0 && s <= 1.0; });
}

double AudioBuffer::duration_seconds() const noexcept {
  return static_cast<double>(samples_.size()) / sample_rate_hz_;
}

double pcm16_to_sample(std::int16_t v) noexcept { return v / 32768.0; }

std::int16_t sample_to_pcm16(double s) noexcept {
  if (std::isnan(s)) return 0;
  double q = std::round(s * 32768.0);
  q = std::clamp(q, -32768.0, 32767.0);
  return static_cast<std::int16_t>(q);
}

AudioBuffer decode_wav(std::span<const std::uint8_t> b, std::string source_id) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) {
    throw Error(ErrorKind::MalformedHeader, "missing RIFF/WAVE signature");
  }

  bool have_fmt = false;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t chunk_size = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (chunk_size > b.size() - body) {
      throw Error(ErrorKind::MalformedHeader, "chunk overruns end of file");
    }
    if (tag_is(b, pos, "fmt ")) {
      if (chunk_size < 16) throw Error(ErrorKind::MalformedHeader, "fmt chunk shorter than 16 bytes");
      const std::uint16_t format = get_u16(b, body);
      const std::uint16_t channels = get_u16(b, body + 2);
      rate = get_u32(b, body + 4);
      const std::uint16_t bits = get_u16(b, body + 14);
      if (format != kFormatPcm || bits != 16) {
        throw Error(ErrorKind::UnsupportedFormat,
                    "need PCM 16-bit, got format " + std::to_string(format) + " with " +
                        std::to_string(bits) + " bits");
      }
      if (channels != 1) {
        throw Error(ErrorKind::UnsupportedFormat,
                    "need mono, got " + std::to_string(channels) + " channels");
      }
      if (rate == 0) throw Error(ErrorKind::MalformedHeader, "zero sample rate");
      have_fmt = true;
    } else if (tag_is(b, pos, "data")) {
      if (!have_fmt) throw Error(ErrorKind::MalformedHeader, "data chunk before fmt chunk");
      data = b.subspan(body, chunk_size);
      have_data = true;
      break;
    }
    // chunks are word aligned
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt || !have_data) throw Error(ErrorKind::MalformedHeader, "missing fmt or data chunk");

  std::vector<double> samples(data.size() / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = pcm16_to_sample(static_cast<std::int16_t>(get_u16(data, 2 * i)));
  }
  return AudioBuffer(std::move(samples), static_cast<int>(rate), std::move(source_id));
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf) {
  const auto data_bytes = static_cast<std::uint32_t>(buf.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate_hz()));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate_hz()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : buf.samples()) put_u16(out, static_cast<std::uint16_t>(sample_to_pcm16(s)));
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, path.stem().string());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void write_wav(const AudioBuffer& buf, const std::filesystem::path& path) {
  if (buf.empty()) throw Error(ErrorKind::InvalidArgument, "refusing to write empty buffer to " + path.string());
  const auto bytes = encode_wav(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

}  // namespace advbench
