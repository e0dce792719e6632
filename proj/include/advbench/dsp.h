#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "advbench/audio_io.h"

namespace advbench::dsp {

using Complex = std::complex<double>;

struct Spectrum {
  std::vector<Complex> bins;
  double bin_hz = 0.0;
};

/// Row-major dense matrix of doubles (rows = frames).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> values() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Spectrogram {
  Matrix frames;  // num_frames x num_bands, all cells >= 0
  double frame_hop_s = 0.0;
  std::vector<double> band_centers_hz;
};

struct MfccFrame {
  static constexpr std::size_t kNumCoeffs = 13;
  std::array<double, kNumCoeffs> coeffs{};
};

/// Analysis parameters. Defaults are 25 ms Hann frames with a 10 ms hop at
/// 16 kHz, a 512-point FFT, 40 mel bands and 13 cepstra.
struct FeatureConfig {
  std::size_t frame_len = 400;
  std::size_t hop = 160;
  std::size_t num_mel_bands = 40;
  double log_floor = 1e-10;

  /// Scales frame/hop from the 16 kHz defaults to another rate.
  static FeatureConfig for_rate(int sample_rate_hz);
};

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

/// Forward, unnormalized radix-2 DFT. Throws NotPowerOfTwo.
Spectrum fft(std::span<const Complex> signal, double sample_rate_hz = 1.0);
/// Real input convenience overload.
Spectrum fft(std::span<const double> signal, double sample_rate_hz = 1.0);
/// In-place variant used by the frame loop.
void fft_inplace(std::vector<Complex>& data);

/// Periodic Hann window.
std::vector<double> hann_window(std::size_t n);

/// Hann-windowed frames zero-padded to the next power of two. A trailing
/// partial frame is dropped. Throws SignalTooShort if frame_len > length.
std::vector<Spectrum> stft(const AudioBuffer& buf, std::size_t frame_len, std::size_t hop);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filterbank, `num_bands` x (fft_size/2 + 1), spanning
/// 0 Hz to Nyquist with band edges equally spaced on the mel scale.
Matrix mel_filterbank(std::size_t num_bands, std::size_t fft_size, double sample_rate_hz);
std::vector<double> mel_band_centers(std::size_t num_bands, double sample_rate_hz);

Spectrogram mel_spectrogram(const AudioBuffer& buf, const FeatureConfig& cfg);
Spectrogram mel_spectrogram(const AudioBuffer& buf);

/// log(max(e, floor)) per band followed by an orthonormal DCT-II; keeps 13.
std::vector<MfccFrame> cepstrum(const Spectrogram& mel, double log_floor = 1e-10);
std::vector<MfccFrame> mfcc(const AudioBuffer& buf, const FeatureConfig& cfg);
std::vector<MfccFrame> mfcc(const AudioBuffer& buf);

Matrix to_matrix(const std::vector<MfccFrame>& frames);

/// Writes `<stem>.csv` (one row per matrix row) and `<stem>.pgm` (8-bit
/// binary grayscale, min-max normalized; a constant matrix maps to 0).
void export_matrix(const Matrix& m, const std::filesystem::path& stem);

/// Grayscale levels used by the PGM export.
std::vector<std::uint8_t> to_gray_levels(const Matrix& m);

}  // namespace advbench::dsp
