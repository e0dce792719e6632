#include "advbench/dsp.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "advbench/error.h"

namespace advbench::dsp {

FeatureConfig FeatureConfig::for_rate(int sample_rate_hz) {
  FeatureConfig cfg;
  cfg.frame_len = static_cast<std::size_t>(std::lround(0.025 * sample_rate_hz));
  cfg.hop = static_cast<std::size_t>(std::lround(0.010 * sample_rate_hz));
  return cfg;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) {
    throw Error(ErrorKind::NotPowerOfTwo, "fft length " + std::to_string(n));
  }

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles computed directly per index rather than by repeated
    // multiplication, which keeps the error at O(eps log n).
    std::vector<Complex> w(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      w[k] = {std::cos(angle), std::sin(angle)};
    }
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[start + k];
        const Complex v = a[start + k + half] * w[k];
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

Spectrum fft(std::span<const Complex> signal, double sample_rate_hz) {
  std::vector<Complex> data(signal.begin(), signal.end());
  fft_inplace(data);
  const double bin_hz = data.empty() ? 0.0 : sample_rate_hz / static_cast<double>(data.size());
  return {std::move(data), bin_hz};
}

Spectrum fft(std::span<const double> signal, double sample_rate_hz) {
  std::vector<Complex> data(signal.begin(), signal.end());
  return fft(std::span<const Complex>(data), sample_rate_hz);
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

std::vector<Spectrum> stft(const AudioBuffer& buf, std::size_t frame_len, std::size_t hop) {
  if (frame_len == 0 || hop == 0) throw Error(ErrorKind::InvalidArgument, "frame length and hop must be positive");
  if (buf.size() < frame_len) {
    throw Error(ErrorKind::SignalTooShort,
                fmt::format("{} samples, need at least {}", buf.size(), frame_len));
  }
  const std::size_t n_fft = next_power_of_two(frame_len);
  const std::size_t num_frames = 1 + (buf.size() - frame_len) / hop;
  const auto window = hann_window(frame_len);
  const auto samples = buf.samples();

  std::vector<Spectrum> frames;
  frames.reserve(num_frames);
  std::vector<Complex> scratch(n_fft);
  for (std::size_t f = 0; f < num_frames; ++f) {
    std::fill(scratch.begin(), scratch.end(), Complex{});
    const std::size_t offset = f * hop;
    for (std::size_t i = 0; i < frame_len; ++i) scratch[i] = samples[offset + i] * window[i];
    fft_inplace(scratch);
    frames.push_back({scratch, static_cast<double>(buf.sample_rate_hz()) / static_cast<double>(n_fft)});
  }
  return frames;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_edges_hz(std::size_t num_bands, double sample_rate_hz) {
  const double top = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> edges(num_bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(num_bands + 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_band_centers(std::size_t num_bands, double sample_rate_hz) {
  auto edges = mel_edges_hz(num_bands, sample_rate_hz);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_filterbank(std::size_t num_bands, std::size_t fft_size, double sample_rate_hz) {
  const std::size_t num_bins = fft_size / 2 + 1;
  const auto edges = mel_edges_hz(num_bands, sample_rate_hz);
  Matrix fb(num_bands, num_bins);
  for (std::size_t b = 0; b < num_bands; ++b) {
    const double lo = edges[b], center = edges[b + 1], hi = edges[b + 2];
    for (std::size_t k = 0; k < num_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(fft_size);
      double w = 0.0;
      if (f > lo && f <= center) {
        w = (f - lo) / (center - lo);
      } else if (f > center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      fb(b, k) = w;
    }
  }
  return fb;
}

Spectrogram mel_spectrogram(const AudioBuffer& buf, const FeatureConfig& cfg) {
  const auto frames = stft(buf, cfg.frame_len, cfg.hop);
  const std::size_t n_fft = next_power_of_two(cfg.frame_len);
  const double rate = buf.sample_rate_hz();
  const Matrix fb = mel_filterbank(cfg.num_mel_bands, n_fft, rate);

  Spectrogram out;
  out.frames = Matrix(frames.size(), cfg.num_mel_bands);
  out.frame_hop_s = static_cast<double>(cfg.hop) / rate;
  out.band_centers_hz = mel_band_centers(cfg.num_mel_bands, rate);

  std::vector<double> power(fb.cols());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(frames[f].bins[k]);
    for (std::size_t b = 0; b < cfg.num_mel_bands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += fb(b, k) * power[k];
      out.frames(f, b) = e;
    }
  }
  return out;
}

Spectrogram mel_spectrogram(const AudioBuffer& buf) {
  return mel_spectrogram(buf, FeatureConfig::for_rate(buf.sample_rate_hz()));
}

std::vector<MfccFrame> cepstrum(const Spectrogram& mel, double log_floor) {
  const std::size_t bands = mel.frames.cols();
  if (bands < MfccFrame::kNumCoeffs) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("need at least {} mel bands, got {}", MfccFrame::kNumCoeffs, bands));
  }
  // Orthonormal DCT-II basis, kNumCoeffs x bands.
  Matrix basis(MfccFrame::kNumCoeffs, bands);
  for (std::size_t k = 0; k < MfccFrame::kNumCoeffs; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(bands));
    for (std::size_t n = 0; n < bands; ++n) {
      basis(k, n) = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                     (2.0 * static_cast<double>(n) + 1.0) / (2.0 * static_cast<double>(bands)));
    }
  }

  std::vector<MfccFrame> out(mel.frames.rows());
  std::vector<double> logs(bands);
  for (std::size_t f = 0; f < out.size(); ++f) {
    for (std::size_t n = 0; n < bands; ++n) logs[n] = std::log(std::max(mel.frames(f, n), log_floor));
    for (std::size_t k = 0; k < MfccFrame::kNumCoeffs; ++k) {
      double acc = 0.0;
      for (std::size_t n = 0; n < bands; ++n) acc += basis(k, n) * logs[n];
      out[f].coeffs[k] = acc;
    }
  }
  return out;
}

std::vector<MfccFrame> mfcc(const AudioBuffer& buf, const FeatureConfig& cfg) {
  return cepstrum(mel_spectrogram(buf, cfg), cfg.log_floor);
}

std::vector<MfccFrame> mfcc(const AudioBuffer& buf) {
  return mfcc(buf, FeatureConfig::for_rate(buf.sample_rate_hz()));
}

Matrix to_matrix(const std::vector<MfccFrame>& frames) {
  Matrix m(frames.size(), MfccFrame::kNumCoeffs);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t k = 0; k < MfccFrame::kNumCoeffs; ++k) m(f, k) = frames[f].coeffs[k];
  }
  return m;
}

std::vector<std::uint8_t> to_gray_levels(const Matrix& m) {
  const auto values = m.values();
  std::vector<std::uint8_t> px(values.size(), 0);
  if (values.empty()) return px;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  if (!(range > 0.0)) return px;
  for (std::size_t i = 0; i < values.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::lround((values[i] - lo) / range * 255.0));
  }
  return px;
}

void export_matrix(const Matrix& m, const std::filesystem::path& stem) {
  auto csv_path = stem;
  csv_path += ".csv";
  auto pgm_path = stem;
  pgm_path += ".pgm";

  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorKind::IoFailure, "cannot open " + csv_path.string());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) csv << ',';
      csv << fmt::format("{:.17g}", row[c]);
    }
    csv << '\n';
  }
  if (!csv) throw Error(ErrorKind::IoFailure, "write failed for " + csv_path.string());

  std::ofstream pgm(pgm_path, std::ios::binary);
  if (!pgm) throw Error(ErrorKind::IoFailure, "cannot open " + pgm_path.string());
  pgm << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  const auto px = to_gray_levels(m);
  pgm.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!pgm) throw Error(ErrorKind::IoFailure, "write failed for " + pgm_path.string());
}

}  // namespace advbench::dsp
