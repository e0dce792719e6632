#include "advbench/harness.h"

#include <gtest/gtest.h>

#include <sstream>

#include "advbench/annotation.h"
#include "advbench/audio_io.h"
#include "advbench/error.h"
#include "support/test_support.h"

using namespace advbench;
namespace fs = std::filesystem;
using advbench::testing::make_corpus;
using advbench::testing::read_text;
using advbench::testing::TempDir;
using advbench::testing::write_text;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

ExperimentConfig base_config(const TempDir& dir, const std::vector<std::string>& descriptor_lines) {
  ExperimentConfig cfg;
  cfg.corpus_dir = dir / "corpus";
  cfg.output_dir = dir / "out";
  for (std::size_t i = 0; i < descriptor_lines.size(); ++i) {
    const auto p = dir / ("t" + std::to_string(i) + ".kv");
    write_text(p, descriptor_lines[i]);
    cfg.transcriber_descriptors.push_back(p);
  }
  return cfg;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(ScanCorpus, PairsSortedByStem) {
  TempDir dir;
  for (const char* f : {"b.wav", "b.txt", "a.WAV", "a.txt", "c.wav", "d.txt", "A.txt"}) write_text(dir / f, "x");
  std::vector<std::string> warnings;
  const auto items = scan_corpus(dir.path(), &warnings);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].stem, "a");
  EXPECT_EQ(items[1].stem, "b");
  EXPECT_EQ(warnings.size(), 3u);  // c.wav, d.txt, A.txt
}

TEST(ScanCorpus, EmptyCorpus) {
  TempDir dir;
  write_text(dir / "a.wav", "x");
  EXPECT_EQ(kind_of([&] { scan_corpus(dir.path()); }), ErrorKind::EmptyCorpus);
  EXPECT_EQ(kind_of([&] { scan_corpus(dir / "nope"); }), ErrorKind::EmptyCorpus);
}

TEST(Conditions, LabelsAndOrder) {
  EXPECT_EQ(condition_label(ConditionKind::ReverseOverlay, -0.0), "x+d0");
  EXPECT_EQ(condition_label(ConditionKind::ReverseOverlay, -7.5), "x+d-7.5");
  ExperimentConfig cfg;
  cfg.attack_offsets_db = {-20, 0, -10};
  cfg.precomputed_overlays_dir = "/tmp";
  cfg.include_delta_rows = true;
  std::vector<std::string> labels;
  for (const auto& c : cfg.conditions()) labels.push_back(c.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"x", "x+d0", "x+d-10", "x+d-20", "x+CW", "d0", "d-10", "d-20"}));
}

TEST(Harness, EchoGivesZeroWer) {
  TempDir dir;
  make_corpus(dir / "corpus", 3);
  auto cfg = base_config(dir, {"name=echo\nkind=mock\n"});
  cfg.attack_offsets_db = {};
  const auto rep = run_experiment(cfg);
  ASSERT_EQ(rep.records.size(), 3u);
  for (const auto& r : rep.records) EXPECT_EQ(r.breakdown.wer, 0.0);
  const auto& cell = rep.aggregates.at({"x", "echo"});
  EXPECT_EQ(cell.mean, 0.0);
  EXPECT_EQ(cell.std, 0.0);
  EXPECT_EQ(cell.count, 3u);
  EXPECT_EQ(rep.generated_files, 3u);
}

TEST(Harness, DropoutOneGivesWerOne) {
  TempDir dir;
  make_corpus(dir / "corpus", 3);
  auto cfg = base_config(dir, {"name=deaf\nkind=mock\ndropout=1.0\n"});
  const auto rep = run_experiment(cfg);
  for (const auto& label : rep.conditions) {
    const auto& cell = rep.aggregates.at({label, "deaf"});
    EXPECT_EQ(cell.mean, 1.0);
    EXPECT_EQ(cell.std, 0.0);
  }
}

TEST(Harness, SimilarityOrderingAndCompleteness) {
  TempDir dir;
  make_corpus(dir / "corpus", 3);
  auto cfg = base_config(dir, {"name=echo\nkind=mock\n"});
  cfg.attack_offsets_db = {0, -20};
  cfg.include_delta_rows = true;
  fs::create_directories(dir / "cw");
  for (int i = 0; i < 3; ++i) {
    write_wav(advbench::testing::speech_like(77 + i, 0.5, 16000, 0.01), dir / "cw" / ("utt" + std::to_string(i) + ".wav"));
  }
  cfg.precomputed_overlays_dir = dir / "cw";

  const auto before = read_text(dir / "corpus" / "utt0.wav");
  const auto rep = run_experiment(cfg);
  EXPECT_EQ(read_text(dir / "corpus" / "utt0.wav"), before);

  EXPECT_GE(rep.similarity.at("x+d-20").mean, rep.similarity.at("x+d0").mean);
  EXPECT_EQ(rep.similarity.at("x+d-20").count, 3u);
  // clean + 2 offsets + CW + 2 delta rows
  EXPECT_EQ(rep.generated_files, 3u * 6u);
  std::size_t wavs = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "out" / "conditions")) wavs += e.path().extension() == ".wav";
  EXPECT_EQ(wavs, 18u);
  EXPECT_TRUE(fs::exists(dir / "out" / "conditions" / "x+CW" / "utt2.wav"));
  EXPECT_TRUE(fs::exists(dir / "out" / "conditions" / "d-20" / "utt0.wav"));
}

TEST(Harness, FailuresExcludedPerCell) {
  TempDir dir;
  make_corpus(dir / "corpus", 3);
  // fails for utt1 only
  auto cfg = base_config(dir, {"name=echo\nkind=mock\n",
                               "name=picky\nkind=external\ncommand=case {input} in *utt1*) exit 3;; esac; echo "
                               "she had your dark suit\ntimeout_s=10\n"});
  cfg.attack_offsets_db = {-15};
  const auto rep = run_experiment(cfg);
  const auto& picky = rep.aggregates.at({"x", "picky"});
  EXPECT_EQ(picky.count, 2u);
  EXPECT_EQ(picky.failures, 1u);
  EXPECT_EQ(rep.aggregates.at({"x", "echo"}).count, 3u);
  EXPECT_EQ(rep.failures.size(), 2u);  // x and x+d-15 for utt1
  for (const auto& f : rep.failures) {
    EXPECT_EQ(f.audio_id, "utt1");
    EXPECT_NE(f.error.find("CommandFailed"), std::string::npos);
  }
}

TEST(Harness, DeterministicRecordsAndRecomputableAggregates) {
  TempDir dir;
  make_corpus(dir / "corpus", 4);
  auto cfg = base_config(dir, {"name=noisy\nkind=mock\ndropout=0.3\nseed=5\n", "name=echo\nkind=mock\n"});
  cfg.seed = 11;
  cfg.workers = 3;
  const auto a = run_experiment(cfg);
  emit_report(a, dir / "out");
  const auto first = read_text(dir / "out" / "records.csv");
  cfg.workers = 1;
  const auto b = run_experiment(cfg);
  emit_report(b, dir / "out");
  EXPECT_EQ(read_text(dir / "out" / "records.csv"), first);

  // aggregates from the csv integer columns
  const auto rows = parse_csv(first);
  ASSERT_EQ(rows.front(), (std::vector<std::string>{"audio_id", "condition", "transcriber", "S", "D", "I", "N", "wer"}));
  std::vector<WerRecord> recs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    WerBreakdown wb{std::stoul(rows[i][3]), std::stoul(rows[i][4]), std::stoul(rows[i][5]), std::stoul(rows[i][6]), 0.0};
    wb.wer = static_cast<double>(wb.distance()) / static_cast<double>(wb.ref_len);
    recs.push_back({rows[i][0], rows[i][1], rows[i][2], wb});
  }
  const auto again = aggregate(a.conditions, a.transcribers, recs, a.failures);
  for (const auto& [key, cell] : a.aggregates) {
    EXPECT_EQ(again.at(key).mean, cell.mean);
    EXPECT_EQ(again.at(key).std, cell.std);
    EXPECT_EQ(again.at(key).count, cell.count);
  }
  EXPECT_GT(a.aggregates.at({"x", "noisy"}).mean, 0.0);
}

TEST(Harness, ConfigErrors) {
  TempDir dir;
  make_corpus(dir / "corpus", 2);
  auto cfg = base_config(dir, {"name=echo\nkind=mock\n"});
  cfg.attack_offsets_db = {5.0};
  EXPECT_EQ(kind_of([&] { run_experiment(cfg); }), ErrorKind::ConfigInvalid);

  cfg = base_config(dir, {"name=echo\nkind=mock\n", "name=echo\nkind=mock\n"});
  EXPECT_EQ(kind_of([&] { run_experiment(cfg); }), ErrorKind::ConfigInvalid);

  cfg = base_config(dir, {"name=echo\nkind=mock\n"});
  cfg.precomputed_overlays_dir = dir.path();
  EXPECT_EQ(kind_of([&] { run_experiment(cfg); }), ErrorKind::ConfigInvalid);

  cfg = base_config(dir, {"name=echo\nkind=mock\n"});
  cfg.corpus_dir = dir / "void";
  fs::create_directories(cfg.corpus_dir);
  EXPECT_EQ(kind_of([&] { run_experiment(cfg); }), ErrorKind::EmptyCorpus);
}

TEST(Harness, ConfigFileResolvesRelativePaths) {
  TempDir dir;
  write_text(dir / "exp.cfg",
             "corpus_dir=corpus\nattack_offsets_db=0, -15\ninclude_clean=no\ntranscribers=a.kv,b.kv\n"
             "output_dir=out\nseed=3\nworkers=2\n");
  const auto cfg = ExperimentConfig::load(dir / "exp.cfg");
  EXPECT_EQ(cfg.corpus_dir, dir / "corpus");
  EXPECT_EQ(cfg.attack_offsets_db, (std::vector<double>{0, -15}));
  EXPECT_FALSE(cfg.include_clean);
  EXPECT_EQ(cfg.transcriber_descriptors.size(), 2u);
  EXPECT_EQ(cfg.transcriber_descriptors[1], dir / "b.kv");
  EXPECT_EQ(cfg.workers, 2);

  write_text(dir / "bad.cfg", "corpus_dir=c\nbogus=1\n");
  EXPECT_EQ(kind_of([&] { ExperimentConfig::load(dir / "bad.cfg"); }), ErrorKind::ConfigInvalid);
  write_text(dir / "bad2.cfg", "workers=many\n");
  EXPECT_EQ(kind_of([&] { ExperimentConfig::load(dir / "bad2.cfg"); }), ErrorKind::ConfigInvalid);
}

TEST(Report, Formatting) {
  EXPECT_EQ(format_wer_cell(0.3333, 0.1), "0.33 (0.10)");
  EXPECT_EQ(format_wer_cell(1.0, 0.0), "1.00 (0.00)");
  EXPECT_EQ(format_similarity(0.9999296), "0.999930");

  ExperimentReport rep;
  rep.conditions = {"x", "x+d0"};
  rep.transcribers = {"ds", "broken"};
  rep.records = {{"a", "x", "ds", {0, 1, 0, 3, 1.0 / 3.0}}, {"a", "x+d0", "ds", {1, 0, 0, 3, 1.0 / 3.0}}};
  rep.failures = {{"a", "x", "broken", "Timeout: slow"}, {"a", "x+d0", "broken", "Timeout: slow"}};
  rep.aggregates = aggregate(rep.conditions, rep.transcribers, rep.records, rep.failures);
  rep.similarity["x+d0"] = {0.9999296, 0.0000337, 1};
  const auto t1 = render_table1(rep);
  EXPECT_NE(t1.find("| Audio Files | ds | broken |"), std::string::npos);
  EXPECT_NE(t1.find("| x | 0.33 (0.00) | —[^1] |"), std::string::npos);
  EXPECT_NE(t1.find("[^2]: broken on x+d0: all 1 transcriptions failed"), std::string::npos);
  const auto t2 = render_table2(rep);
  EXPECT_NE(t2.find("| x+d0 | 0.999930 | 0.000034 |"), std::string::npos);
  EXPECT_EQ(t2.find("| x |"), std::string::npos);

  TempDir dir;
  emit_report(rep, dir / "r");
  for (const char* f : {"records.csv", "failures.csv", "table1.md", "table2.md"}) EXPECT_TRUE(fs::exists(dir / "r" / f));
}

TEST(Harness, HumanRecordsBecomeAColumn) {
  TempDir dir;
  make_corpus(dir / "corpus", 2);
  using annotation::AnnotationRecord;
  std::string dump;
  dump += annotation::format_record_line({"ann1", "utt0", "x+d-15", "She had your dark suit, in greasy wash water all year!", "t"}) + "\n";
  dump += annotation::format_record_line({"ann1", "utt1", "x+d-15", "don't ask me", "t"}) + "\n";
  dump += annotation::format_record_line({"ann1", "utt1", "x+d-15", "Don't ask me to carry an oily rag like that", "t2"}) + "\n";
  dump += annotation::format_record_line({"ann2", "utt0", "x+d-99", "ignored", "t"}) + "\n";
  write_text(dir / "human.tsv", dump);

  auto cfg = base_config(dir, {"name=echo\nkind=mock\n"});
  cfg.attack_offsets_db = {-15};
  cfg.human_records = dir / "human.tsv";
  const auto rep = run_experiment(cfg);
  EXPECT_EQ(rep.transcribers.back(), kHumanTranscriber);
  const auto& humans = rep.aggregates.at({"x+d-15", kHumanTranscriber});
  EXPECT_EQ(humans.count, 2u);
  EXPECT_EQ(humans.mean, 0.0);
  EXPECT_EQ(rep.aggregates.at({"x", kHumanTranscriber}).count, 0u);
  EXPECT_NE(render_table1(rep).find("| x+d-15 | 0.00 (0.00) | 0.00 (0.00) |"), std::string::npos);
}
