#include "advbench/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "advbench/attack.h"
#include "advbench/error.h"
#include "support/oracles.h"
#include "support/test_support.h"

using namespace advbench;
using advbench::testing::brute_force_edit;

namespace {

using Words = std::vector<std::string>;

Transcript words(Words w) {
  Transcript t;
  t.words = std::move(w);
  return t;
}

Words random_words(std::mt19937_64& rng, std::size_t max_len = 8) {
  static const Words vocab{"a", "b", "c", "d", "e"};
  Words out(rng() % (max_len + 1));
  for (auto& w : out) w = vocab[rng() % vocab.size()];
  return out;
}

}  // namespace

TEST(Normalize, Rules) {
  EXPECT_EQ(normalize_text("Hi, welcome!\n").words, (Words{"hi", "welcome"}));
  EXPECT_TRUE(normalize_text("").words.empty());
  EXPECT_EQ(normalize_text("don't STOP").words, (Words{"don't", "stop"}));
  EXPECT_EQ(normalize_text("  tabs\tand\r\nnew-lines 42x ").words, (Words{"tabs", "and", "new", "lines", "42x"}));
  EXPECT_EQ(normalize_text("caf\xc3\xa9").words, (Words{"caf"}));
}

TEST(Normalize, IdempotentAndClean) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "abcXYZ019' ,.!?-\t\n\"";
  for (int trial = 0; trial < 200; ++trial) {
    std::string raw(rng() % 40, ' ');
    for (auto& c : raw) c = alphabet[rng() % alphabet.size()];
    const auto once = normalize_text(raw);
    EXPECT_EQ(normalize_text(once.joined()).words, once.words);
    for (const auto& w : once.words) {
      ASSERT_FALSE(w.empty());
      for (char c : w) ASSERT_TRUE((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'');
    }
  }
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(word_edit_distance(words({"a", "b", "c"}), words({"a", "b", "c"})).distance(), 0u);

  const auto all_del = word_edit_distance(words({"a", "b", "c"}), words({}));
  EXPECT_EQ(all_del.deletions, 3u);
  EXPECT_EQ(all_del.distance(), 3u);

  // oracle: brute_force_edit({a,b,c},{a,x,c,d}) -> distance 2, S=1 D=0 I=1 (unique optimum)
  const auto oracle = brute_force_edit({"a", "b", "c"}, {"a", "x", "c", "d"});
  ASSERT_EQ(oracle.distance, 2u);
  ASSERT_EQ(oracle.optimal_scripts, 1u);
  const auto b = word_edit_distance(words({"a", "b", "c"}), words({"a", "x", "c", "d"}));
  EXPECT_EQ(b.substitutions, 1u);
  EXPECT_EQ(b.deletions, 0u);
  EXPECT_EQ(b.insertions, 1u);
  EXPECT_EQ(b.ref_len, 3u);
}

TEST(EditDistance, TieBreakPrefersSubstitution) {
  // [a] vs [b]: S=1 or D+I=2; only S is optimal. [a b] vs [b a]: S=2 or D=1,I=1 both cost 2.
  const auto b = word_edit_distance(words({"a", "b"}), words({"b", "a"}));
  EXPECT_EQ(b.distance(), 2u);
  EXPECT_EQ(b.substitutions, 2u);
  EXPECT_EQ(b.deletions + b.insertions, 0u);
}

TEST(EditDistance, MatchesBruteForceAndMetricAxioms) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_words(rng), b = random_words(rng), c = random_words(rng);
    const auto dab = word_edit_distance(words(a), words(b));
    ASSERT_EQ(dab.distance(), brute_force_edit(a, b).distance);
    ASSERT_EQ(dab.deletions - dab.insertions, a.size() - b.size()) << "D - I must equal length difference";
    ASSERT_LE(dab.substitutions + dab.deletions, a.size());

    ASSERT_EQ(word_edit_distance(words(a), words(a)).distance(), 0u);
    ASSERT_EQ(dab.distance(), word_edit_distance(words(b), words(a)).distance());
    ASSERT_LE(word_edit_distance(words(a), words(c)).distance(),
              dab.distance() + word_edit_distance(words(b), words(c)).distance());
  }
}

TEST(Wer, Values) {
  EXPECT_DOUBLE_EQ(wer(words({"a", "b"}), words({"a", "b"})).wer, 0.0);
  EXPECT_DOUBLE_EQ(wer(words({"a", "b", "c"}), words({})).wer, 1.0);
  EXPECT_DOUBLE_EQ(wer(words({"a", "b", "c"}), words({"a", "x", "c", "d"})).wer, 2.0 / 3.0);

  // far more hypothesis words than reference words pushes WER past 1
  const auto long_hyp = wer(words({"a", "b"}), words({"a", "b", "c", "d", "e", "a", "b"}));
  EXPECT_EQ(long_hyp.insertions, 5u);
  EXPECT_GT(long_hyp.wer, 1.0);
  EXPECT_DOUBLE_EQ(long_hyp.wer, 2.5);

  try {
    wer(words({}), words({"a"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyReference);
  }
}

TEST(Db, Relative) {
  const auto x = advbench::testing::speech_like(1);
  EXPECT_DOUBLE_EQ(db_relative(x, x), 0.0);

  std::vector<double> tenth(x.samples().begin(), x.samples().end());
  for (auto& s : tenth) s *= 0.1;
  EXPECT_NEAR(db_relative(AudioBuffer(tenth, 16000), x), -20.0, 1e-9);

  for (double p = -40.0; p <= 0.0; p += 2.5) EXPECT_NEAR(db_relative(apply_gain_db(x, p), x), p, 1e-9);

  try {
    db_relative(AudioBuffer({0.0, 0.0}, 16000), x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SilentSignal);
  }
}

TEST(Cosine, Basics) {
  const auto x = advbench::testing::speech_like(2);
  EXPECT_NEAR(cosine_similarity(x, x), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(x, apply_gain_db(x, 6.0206)), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(cosine_similarity(AudioBuffer({1, 0}, 16000), AudioBuffer({0, 1}, 16000)), 0.0);
  EXPECT_NEAR(cosine_similarity(AudioBuffer({1, 1}, 16000), AudioBuffer({1}, 16000)), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(cosine_similarity(x, AudioBuffer({0.0}, 16000)), Error);

  const auto y = advbench::testing::speech_like(3);
  const double base = cosine_similarity(x, y);
  EXPECT_NEAR(cosine_similarity(apply_gain_db(x, -7.0), apply_gain_db(y, -13.0)), base, 1e-12);
}

TEST(MeanStd, PopulationDefinition) {
  const std::vector<double> ones{1, 1, 1};
  EXPECT_DOUBLE_EQ(mean_std(ones).mean, 1.0);
  EXPECT_DOUBLE_EQ(mean_std(ones).std, 0.0);

  const std::vector<double> two{0.2, 0.4};
  EXPECT_NEAR(mean_std(two).mean, 0.3, 1e-15);
  EXPECT_NEAR(mean_std(two).std, 0.1, 1e-15);

  const std::vector<double> one{0.5};
  EXPECT_DOUBLE_EQ(mean_std(one).mean, 0.5);
  EXPECT_DOUBLE_EQ(mean_std(one).std, 0.0);

  try {
    mean_std({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
}
