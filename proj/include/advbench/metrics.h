#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advbench/audio_io.h"

namespace advbench {

enum class Provenance { Reference, Machine, Human };

/// Normalized word sequence: lowercase tokens over [a-z0-9'].
struct Transcript {
  std::vector<std::string> words;
  Provenance provenance = Provenance::Machine;
  std::string audio_id;

  std::string joined() const;
};

struct WerBreakdown {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;
  double wer = 0.0;

  std::size_t distance() const noexcept { return substitutions + deletions + insertions; }
  bool operator==(const WerBreakdown&) const = default;
};

/// Lowercases, maps everything outside [a-z0-9'] to a space and splits on runs
/// of whitespace.
Transcript normalize_text(std::string_view raw, Provenance provenance = Provenance::Machine,
                          std::string audio_id = {});

/// Wagner-Fischer over words with unit costs. The backtrace prefers
/// substitution, then deletion, then insertion when several moves are optimal.
/// `ref_len` is filled in; `wer` is left at 0.
WerBreakdown word_edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp);
WerBreakdown word_edit_distance(const Transcript& ref, const Transcript& hyp);

/// (S + D + I) / N, unclamped. Throws EmptyReference when N = 0.
WerBreakdown wer(const Transcript& ref, const Transcript& hyp);

/// Mean of squared samples.
double mean_square(const AudioBuffer& x);

/// 10·log10(msq(x1) / msq(x)); each mean square over its own length.
/// Throws SilentSignal when either side has zero power.
double db_relative(const AudioBuffer& x1, const AudioBuffer& x);

/// dot(a, b) / (|a| |b|); the shorter buffer is implicitly zero-padded.
double cosine_similarity(const AudioBuffer& a, const AudioBuffer& b);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Throws EmptyInput on an empty sequence.
MeanStd mean_std(std::span<const double> values);

}  // namespace advbench
