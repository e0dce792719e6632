#include "advbench/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "advbench/error.h"

namespace advbench {

std::string Transcript::joined() const {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

Transcript normalize_text(std::string_view raw, Provenance provenance, std::string audio_id) {
  Transcript t;
  t.provenance = provenance;
  t.audio_id = std::move(audio_id);
  std::string current;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(ch)));
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
    if (keep) {
      current += static_cast<char>(c);
    } else if (!current.empty()) {
      t.words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) t.words.push_back(std::move(current));
  return t;
}

WerBreakdown word_edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t m = ref.size(), n = hyp.size();
  // cost[i][j]: distance between ref[0..i) and hyp[0..j)
  std::vector<std::vector<std::size_t>> cost(m + 1, std::vector<std::size_t>(n + 1));
  for (std::size_t i = 0; i <= m; ++i) cost[i][0] = i;
  for (std::size_t j = 0; j <= n; ++j) cost[0][j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t diag = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cost[i][j] = std::min({diag, cost[i - 1][j] + 1, cost[i][j - 1] + 1});
    }
  }

  WerBreakdown out;
  out.ref_len = m;
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (same ? 0 : 1)) {
        if (!same) ++out.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++out.deletions;
      --i;
    } else {
      ++out.insertions;
      --j;
    }
  }
  return out;
}

WerBreakdown word_edit_distance(const Transcript& ref, const Transcript& hyp) {
  return word_edit_distance(std::span<const std::string>(ref.words), std::span<const std::string>(hyp.words));
}

WerBreakdown wer(const Transcript& ref, const Transcript& hyp) {
  if (ref.words.empty()) {
    throw Error(ErrorKind::EmptyReference, "reference for '" + ref.audio_id + "' has no words");
  }
  auto out = word_edit_distance(ref, hyp);
  out.wer = static_cast<double>(out.distance()) / static_cast<double>(out.ref_len);
  return out;
}

double mean_square(const AudioBuffer& x) {
  if (x.empty()) return 0.0;
  const auto s = x.samples();
  return std::inner_product(s.begin(), s.end(), s.begin(), 0.0) / static_cast<double>(s.size());
}

double db_relative(const AudioBuffer& x1, const AudioBuffer& x) {
  const double p1 = mean_square(x1), p0 = mean_square(x);
  if (!(p1 > 0.0) || !(p0 > 0.0)) {
    throw Error(ErrorKind::SilentSignal, "dB ratio needs non-zero power on both sides");
  }
  return 10.0 * std::log10(p1 / p0);
}

double cosine_similarity(const AudioBuffer& a, const AudioBuffer& b) {
  const auto sa = a.samples(), sb = b.samples();
  const std::size_t shared = std::min(sa.size(), sb.size());
  const double dot = std::inner_product(sa.begin(), sa.begin() + static_cast<std::ptrdiff_t>(shared), sb.begin(), 0.0);
  const double na = std::inner_product(sa.begin(), sa.end(), sa.begin(), 0.0);
  const double nb = std::inner_product(sb.begin(), sb.end(), sb.begin(), 0.0);
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw Error(ErrorKind::SilentSignal, "cosine similarity of a silent signal is undefined");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "mean/std of no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

}  // namespace advbench
