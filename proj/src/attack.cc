#include "advbench/attack.h"

#include <algorithm>
#include <cmath>

#include "advbench/error.h"

namespace advbench {

AttackSpec::AttackSpec(AttackKind kind, double gain_offset_db, std::optional<std::filesystem::path> path)
    : kind_(kind), gain_offset_db_(gain_offset_db), overlay_path_(std::move(path)) {
  if (!std::isfinite(gain_offset_db_) || gain_offset_db_ > 0.0 || gain_offset_db_ < kMinGainDb) {
    throw Error(ErrorKind::InvalidArgument,
                "gain offset must lie in [-60, 0] dB, got " + std::to_string(gain_offset_db_));
  }
}

AttackSpec AttackSpec::reverse_overlay(double gain_offset_db) {
  return AttackSpec(AttackKind::ReverseOverlay, gain_offset_db, std::nullopt);
}

AttackSpec AttackSpec::precomputed(std::filesystem::path overlay_path, double gain_offset_db) {
  return AttackSpec(AttackKind::PrecomputedOverlay, gain_offset_db, std::move(overlay_path));
}

AudioBuffer reverse(const AudioBuffer& x) {
  std::vector<double> out(x.samples().rbegin(), x.samples().rend());
  return AudioBuffer(std::move(out), x.sample_rate_hz(), x.source_id());
}

AudioBuffer apply_gain_db(const AudioBuffer& x, double gain_db) {
  if (!std::isfinite(gain_db)) throw Error(ErrorKind::InvalidArgument, "gain must be finite");
  const double factor = std::pow(10.0, gain_db / 20.0);
  std::vector<double> out(x.size());
  std::transform(x.samples().begin(), x.samples().end(), out.begin(),
                 [factor](double s) { return s * factor; });
  return AudioBuffer(std::move(out), x.sample_rate_hz(), x.source_id());
}

AudioBuffer overlay(const AudioBuffer& x, const AudioBuffer& d) {
  if (x.sample_rate_hz() != d.sample_rate_hz()) {
    throw Error(ErrorKind::RateMismatch, std::to_string(x.sample_rate_hz()) + " Hz vs " +
                                             std::to_string(d.sample_rate_hz()) + " Hz");
  }
  std::vector<double> out(x.samples().begin(), x.samples().end());
  const std::size_t shared = std::min(x.size(), d.size());
  for (std::size_t i = 0; i < shared; ++i) out[i] += d[i];
  for (double& s : out) s = std::clamp(s, -1.0, 1.0);
  return AudioBuffer(std::move(out), x.sample_rate_hz(), x.source_id());
}

AudioBuffer perturbation(const AudioBuffer& x, const AttackSpec& spec) {
  switch (spec.kind()) {
    case AttackKind::ReverseOverlay:
      return apply_gain_db(reverse(x), spec.gain_offset_db());
    case AttackKind::PrecomputedOverlay:
      return apply_gain_db(read_wav(*spec.overlay_path()), spec.gain_offset_db());
  }
  throw Error(ErrorKind::InvalidArgument, "unknown attack kind");
}

AudioBuffer generate_attack(const AudioBuffer& x, const AttackSpec& spec) {
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "cannot attack an empty buffer");
  return overlay(x, perturbation(x, spec));
}

}  // namespace advbench
