#pragma once

// Independent reference implementations used only by tests. None of these
// share code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace advbench::testing {

/// O(n^2) DFT straight from the definition.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{};
    for (std::size_t t = 0; t < n; ++t) {
      // reduce k*t mod n first so the angle stays small and exact
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

struct EditOracleResult {
  std::size_t distance = std::numeric_limits<std::size_t>::max();
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t optimal_scripts = 0;  // number of distinct optimal alignments
};

/// Exhaustive search over every edit script. Any script of substitutions,
/// deletions and insertions corresponds to an order-preserving pairing of some
/// k reference positions with k hypothesis positions (paired words are kept or
/// substituted, the rest deleted or inserted), so enumerating all subset pairs
/// of equal size covers every script.
inline EditOracleResult brute_force_edit(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  const std::size_t m = ref.size(), n = hyp.size();
  EditOracleResult best;
  std::vector<std::size_t> ri, hi;
  for (std::size_t rmask = 0; rmask < (std::size_t{1} << m); ++rmask) {
    ri.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (rmask >> i & 1) ri.push_back(i);
    }
    for (std::size_t hmask = 0; hmask < (std::size_t{1} << n); ++hmask) {
      if (static_cast<std::size_t>(__builtin_popcountll(hmask)) != ri.size()) continue;
      hi.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (hmask >> j & 1) hi.push_back(j);
      }
      std::size_t subs = 0;
      for (std::size_t p = 0; p < ri.size(); ++p) subs += ref[ri[p]] != hyp[hi[p]];
      const std::size_t del = m - ri.size(), ins = n - hi.size();
      const std::size_t d = subs + del + ins;
      if (d < best.distance) {
        best = {d, subs, del, ins, 1};
      } else if (d == best.distance) {
        ++best.optimal_scripts;
      }
    }
  }
  return best;
}

}  // namespace advbench::testing
