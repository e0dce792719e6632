#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "advbench/metrics.h"

namespace advbench {

struct CorpusItem {
  std::string stem;
  std::filesystem::path wav;
  std::filesystem::path reference;
};

/// Pairs `<stem>.wav` with `<stem>.txt` (extensions matched case-insensitively,
/// stems case-sensitively), sorted by stem. Unpaired files are appended to
/// `warnings` when given. Throws EmptyCorpus when no pair exists.
std::vector<CorpusItem> scan_corpus(const std::filesystem::path& dir, std::vector<std::string>* warnings = nullptr);

enum class ConditionKind { Clean, ReverseOverlay, Precomputed, DeltaOnly };

/// One row of the results tables.
struct Condition {
  ConditionKind kind = ConditionKind::Clean;
  double gain_db = 0.0;
  std::string label;  // x, x+d0, x+d-5, ..., x+CW, d0, d-5, ...
};

std::string condition_label(ConditionKind kind, double gain_db = 0.0);

/// Flat key=value experiment description. Relative paths are resolved
/// against the config file's directory.
///
///   corpus_dir=corpus
///   attack_offsets_db=0,-5,-10,-15,-20
///   include_clean=true
///   include_delta_rows=false
///   precomputed_overlays_dir=cw         # optional
///   transcribers=ds.kv,julius.kv
///   human_records=human_records.tsv     # optional
///   output_dir=out
///   seed=1
///   workers=4
struct ExperimentConfig {
  std::filesystem::path corpus_dir;
  std::vector<double> attack_offsets_db{0.0, -5.0, -10.0, -15.0, -20.0};
  bool include_clean = true;
  bool include_delta_rows = false;
  std::optional<std::filesystem::path> precomputed_overlays_dir;
  std::vector<std::filesystem::path> transcriber_descriptors;
  std::optional<std::filesystem::path> human_records;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  int workers = 1;

  static ExperimentConfig load(const std::filesystem::path& path);
  /// Throws ConfigInvalid.
  void validate() const;
  /// Conditions in table order.
  std::vector<Condition> conditions() const;
};

inline const std::string kHumanTranscriber = "Humans";

struct WerRecord {
  std::string audio_id;
  std::string condition;
  std::string transcriber;
  WerBreakdown breakdown;
};

struct FailureRecord {
  std::string audio_id;
  std::string condition;
  std::string transcriber;
  std::string error;
};

struct CellAggregate {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
  std::size_t failures = 0;
};

struct SimilarityAggregate {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

using CellKey = std::pair<std::string, std::string>;  // (condition, transcriber)

struct ExperimentReport {
  std::vector<std::string> conditions;
  std::vector<std::string> transcribers;
  std::vector<WerRecord> records;
  std::vector<FailureRecord> failures;
  std::map<CellKey, CellAggregate> aggregates;
  std::map<std::string, SimilarityAggregate> similarity;  // vs the clean source
  std::size_t generated_files = 0;
};

/// Mean/std per (condition, transcriber) over `records`, with failure counts.
std::map<CellKey, CellAggregate> aggregate(const std::vector<std::string>& conditions,
                                           const std::vector<std::string>& transcribers,
                                           const std::vector<WerRecord>& records,
                                           const std::vector<FailureRecord>& failures);

/// Throws EmptyCorpus or ConfigInvalid.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes records.csv, failures.csv, table1.md and table2.md into `dir`.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

std::string format_wer_cell(double mean, double std);
std::string format_similarity(double value);
std::string render_table1(const ExperimentReport& report);
std::string render_table2(const ExperimentReport& report);
std::string render_records_csv(const ExperimentReport& report);

}  // namespace advbench
