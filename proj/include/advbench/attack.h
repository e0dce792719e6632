#pragma once

#include <filesystem>
#include <optional>

#include "advbench/audio_io.h"

namespace advbench {

enum class AttackKind {
  /// δ is the time-reversed source.
  ReverseOverlay,
  /// δ is read from a file produced elsewhere (e.g. a Carlini-Wagner perturbation).
  PrecomputedOverlay,
};

/// Describes δ_p: which perturbation to use and how far below its natural
/// intensity (in dB, p ≤ 0) to place it.
class AttackSpec {
 public:
  static constexpr double kMinGainDb = -60.0;

  static AttackSpec reverse_overlay(double gain_offset_db);
  static AttackSpec precomputed(std::filesystem::path overlay_path, double gain_offset_db = 0.0);

  AttackKind kind() const noexcept { return kind_; }
  double gain_offset_db() const noexcept { return gain_offset_db_; }
  const std::optional<std::filesystem::path>& overlay_path() const noexcept { return overlay_path_; }

 private:
  AttackSpec(AttackKind kind, double gain_offset_db, std::optional<std::filesystem::path> path);

  AttackKind kind_;
  double gain_offset_db_;
  std::optional<std::filesystem::path> overlay_path_;
};

AudioBuffer reverse(const AudioBuffer& x);

/// Scales amplitudes by 10^(p/20), so mean-square power moves by exactly p dB.
/// No clamping.
AudioBuffer apply_gain_db(const AudioBuffer& x, double gain_db);

/// x + d, clamped to [-1, 1]. `d` is zero-padded or truncated to x's length.
/// Throws RateMismatch when the rates differ.
AudioBuffer overlay(const AudioBuffer& x, const AudioBuffer& d);

/// The attenuated perturbation δ_p alone (before it is mixed into x).
AudioBuffer perturbation(const AudioBuffer& x, const AttackSpec& spec);

/// x' = overlay(x, δ_p).
AudioBuffer generate_attack(const AudioBuffer& x, const AttackSpec& spec);

}  // namespace advbench
