#include "advbench/harness.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "advbench/annotation.h"
#include "advbench/attack.h"
#include "advbench/error.h"
#include "advbench/kv_file.h"
#include "advbench/transcribers.h"

namespace advbench {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::ConfigInvalid, key + ": not a number: '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::ConfigInvalid, key + ": not an integer: '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto v = lower(text);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::ConfigInvalid, key + ": not a boolean: '" + text + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Per-file output of the worker pool, merged in corpus order afterwards.
struct FileResult {
  std::vector<WerRecord> records;
  std::vector<FailureRecord> failures;
  std::map<std::string, double> similarity;
  std::size_t generated = 0;
};

}  // namespace

std::vector<CorpusItem> scan_corpus(const fs::path& dir, std::vector<std::string>* warnings) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::EmptyCorpus, "not a directory: " + dir.string());
  std::map<std::string, fs::path> wavs, refs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = lower(entry.path().extension().string());
    if (ext == ".wav") {
      wavs.emplace(entry.path().stem().string(), entry.path());
    } else if (ext == ".txt") {
      refs.emplace(entry.path().stem().string(), entry.path());
    }
  }

  std::vector<CorpusItem> items;
  for (const auto& [stem, wav] : wavs) {
    if (auto ref = refs.find(stem); ref != refs.end()) {
      items.push_back({stem, wav, ref->second});
    } else if (warnings) {
      warnings->push_back("audio without reference: " + wav.filename().string());
    }
  }
  if (warnings) {
    for (const auto& [stem, ref] : refs) {
      if (!wavs.contains(stem)) warnings->push_back("reference without audio: " + ref.filename().string());
    }
  }
  if (items.empty()) throw Error(ErrorKind::EmptyCorpus, "no (wav, txt) pairs in " + dir.string());
  return items;
}

std::string condition_label(ConditionKind kind, double gain_db) {
  if (gain_db == 0.0) gain_db = 0.0;  // drop the sign of -0
  switch (kind) {
    case ConditionKind::Clean: return "x";
    case ConditionKind::ReverseOverlay: return fmt::format("x+d{:g}", gain_db);
    case ConditionKind::Precomputed: return "x+CW";
    case ConditionKind::DeltaOnly: return fmt::format("d{:g}", gain_db);
  }
  return "?";
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  const auto kv = KvFile::load(path);
  const auto base = path.parent_path();
  ExperimentConfig cfg;
  try {
    static const std::set<std::string> known{"corpus_dir",  "attack_offsets_db", "include_clean",
                                             "include_delta_rows", "precomputed_overlays_dir", "transcribers",
                                             "human_records", "output_dir", "seed", "workers"};
    for (const auto& [key, _] : kv.values()) {
      if (!known.contains(key)) throw Error(ErrorKind::ConfigInvalid, "unknown key '" + key + "'");
    }
    if (auto v = kv.get("corpus_dir")) cfg.corpus_dir = resolve(base, *v);
    if (auto v = kv.get("attack_offsets_db")) {
      cfg.attack_offsets_db.clear();
      for (const auto& item : split_list(*v)) cfg.attack_offsets_db.push_back(parse_real("attack_offsets_db", item));
    }
    if (auto v = kv.get("include_clean")) cfg.include_clean = parse_bool("include_clean", *v);
    if (auto v = kv.get("include_delta_rows")) cfg.include_delta_rows = parse_bool("include_delta_rows", *v);
    if (auto v = kv.get("precomputed_overlays_dir"); v && !v->empty()) cfg.precomputed_overlays_dir = resolve(base, *v);
    if (auto v = kv.get("transcribers")) {
      for (const auto& item : split_list(*v)) cfg.transcriber_descriptors.push_back(resolve(base, item));
    }
    if (auto v = kv.get("human_records"); v && !v->empty()) cfg.human_records = resolve(base, *v);
    if (auto v = kv.get("output_dir")) cfg.output_dir = resolve(base, *v);
    if (auto v = kv.get("seed")) cfg.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
    if (auto v = kv.get("workers")) cfg.workers = static_cast<int>(parse_int("workers", *v));
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + e.detail());
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (corpus_dir.empty()) throw Error(ErrorKind::ConfigInvalid, "corpus_dir is required");
  if (output_dir.empty()) throw Error(ErrorKind::ConfigInvalid, "output_dir is required");
  if (workers < 1) throw Error(ErrorKind::ConfigInvalid, "workers must be >= 1");
  for (double p : attack_offsets_db) {
    if (!(p <= 0.0 && p >= -60.0)) {
      throw Error(ErrorKind::ConfigInvalid, fmt::format("attack offset {} outside [-60, 0] dB", p));
    }
  }
  if (transcriber_descriptors.empty() && !human_records) {
    throw Error(ErrorKind::ConfigInvalid, "need at least one transcriber or human_records");
  }
  if (conditions().empty()) throw Error(ErrorKind::ConfigInvalid, "no conditions selected");
  if (precomputed_overlays_dir && !fs::is_directory(*precomputed_overlays_dir)) {
    throw Error(ErrorKind::ConfigInvalid, "precomputed_overlays_dir is not a directory");
  }
  if (human_records && !fs::is_regular_file(*human_records)) {
    throw Error(ErrorKind::ConfigInvalid, "human_records file not found: " + human_records->string());
  }
  const auto out = fs::weakly_canonical(output_dir);
  const auto corpus = fs::weakly_canonical(corpus_dir);
  if (out == corpus) throw Error(ErrorKind::ConfigInvalid, "output_dir must differ from corpus_dir");
}

std::vector<Condition> ExperimentConfig::conditions() const {
  auto offsets = attack_offsets_db;
  std::sort(offsets.begin(), offsets.end(), std::greater<>());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());

  std::vector<Condition> out;
  if (include_clean) out.push_back({ConditionKind::Clean, 0.0, condition_label(ConditionKind::Clean)});
  for (double p : offsets) out.push_back({ConditionKind::ReverseOverlay, p, condition_label(ConditionKind::ReverseOverlay, p)});
  if (precomputed_overlays_dir) out.push_back({ConditionKind::Precomputed, 0.0, condition_label(ConditionKind::Precomputed)});
  if (include_delta_rows) {
    for (double p : offsets) out.push_back({ConditionKind::DeltaOnly, p, condition_label(ConditionKind::DeltaOnly, p)});
  }
  return out;
}

std::map<CellKey, CellAggregate> aggregate(const std::vector<std::string>& conditions,
                                           const std::vector<std::string>& transcribers,
                                           const std::vector<WerRecord>& records,
                                           const std::vector<FailureRecord>& failures) {
  std::map<CellKey, std::vector<double>> values;
  std::map<CellKey, CellAggregate> out;
  for (const auto& c : conditions) {
    for (const auto& t : transcribers) out[{c, t}] = {};
  }
  for (const auto& r : records) values[{r.condition, r.transcriber}].push_back(r.breakdown.wer);
  for (const auto& f : failures) ++out[{f.condition, f.transcriber}].failures;
  for (const auto& [key, v] : values) {
    const auto ms = mean_std(v);
    auto& cell = out[key];
    cell.mean = ms.mean;
    cell.std = ms.std;
    cell.count = v.size();
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::string> warnings;
  const auto corpus = scan_corpus(cfg.corpus_dir, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}", w);

  FixtureMap references;
  for (const auto& item : corpus) {
    try {
      references.emplace(item.stem, load_reference(item.reference));
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigInvalid, "bad reference: " + e.detail());
    }
  }

  std::vector<std::unique_ptr<Transcriber>> transcribers;
  std::set<std::string> names;
  for (const auto& path : cfg.transcriber_descriptors) {
    TranscriberDescriptor desc;
    try {
      desc = TranscriberDescriptor::load(path);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigInvalid, e.detail());
    }
    if (desc.name == kHumanTranscriber || !names.insert(desc.name).second) {
      throw Error(ErrorKind::ConfigInvalid, "duplicate or reserved transcriber name '" + desc.name + "'");
    }
    desc.mock_seed = stable_hash(std::to_string(desc.mock_seed), cfg.seed);
    transcribers.push_back(make_transcriber(desc, references));
  }

  if (cfg.precomputed_overlays_dir) {
    for (const auto& item : corpus) {
      if (!fs::exists(*cfg.precomputed_overlays_dir / (item.stem + ".wav"))) {
        throw Error(ErrorKind::ConfigInvalid, "no precomputed overlay for '" + item.stem + "'");
      }
    }
  }

  const auto conditions = cfg.conditions();
  ExperimentReport report;
  for (const auto& c : conditions) report.conditions.push_back(c.label);
  for (const auto& t : transcribers) report.transcribers.push_back(t->name());
  if (cfg.human_records) report.transcribers.push_back(kHumanTranscriber);

  const fs::path cond_root = cfg.output_dir / "conditions";
  for (const auto& c : conditions) fs::create_directories(cond_root / c.label);

  std::vector<FileResult> results(corpus.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      const auto& item = corpus[i];
      auto& out = results[i];
      const auto& ref = references.at(item.stem);

      auto fail_all = [&](const std::string& condition, const std::string& why) {
        for (const auto& t : transcribers) out.failures.push_back({item.stem, condition, t->name(), why});
      };

      AudioBuffer clean;
      try {
        clean = read_wav(item.wav);
      } catch (const Error& e) {
        spdlog::warn("{}: {}", item.wav.string(), e.what());
        for (const auto& c : conditions) fail_all(c.label, e.what());
        continue;
      }

      for (const auto& c : conditions) {
        AudioBuffer audio;
        try {
          switch (c.kind) {
            case ConditionKind::Clean:
              audio = clean;
              break;
            case ConditionKind::ReverseOverlay:
              audio = generate_attack(clean, AttackSpec::reverse_overlay(c.gain_db));
              break;
            case ConditionKind::Precomputed:
              audio = generate_attack(
                  clean, AttackSpec::precomputed(*cfg.precomputed_overlays_dir / (item.stem + ".wav"), c.gain_db));
              break;
            case ConditionKind::DeltaOnly:
              audio = overlay(AudioBuffer(std::vector<double>(clean.size(), 0.0), clean.sample_rate_hz()),
                              perturbation(clean, AttackSpec::reverse_overlay(c.gain_db)));
              break;
          }
        } catch (const Error& e) {
          fail_all(c.label, e.what());
          continue;
        }

        const auto wav_path = cond_root / c.label / (item.stem + ".wav");
        write_wav(audio, wav_path);
        ++out.generated;

        try {
          out.similarity[c.label] = cosine_similarity(clean, audio);
        } catch (const Error&) {
          // silent source or condition: no similarity sample for this file
        }

        for (const auto& t : transcribers) {
          try {
            const auto hyp = normalize_text(t->transcribe(wav_path), Provenance::Machine, item.stem);
            out.records.push_back({item.stem, c.label, t->name(), wer(ref, hyp)});
          } catch (const Error& e) {
            out.failures.push_back({item.stem, c.label, t->name(), e.what()});
          }
        }
      }
    }
  };

  {
    const auto n = static_cast<std::size_t>(std::max(1, cfg.workers));
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(n, corpus.size()); ++w) pool.emplace_back(work);
    work();
  }

  std::map<std::string, std::vector<double>> similarity;
  for (auto& r : results) {
    report.generated_files += r.generated;
    std::move(r.records.begin(), r.records.end(), std::back_inserter(report.records));
    std::move(r.failures.begin(), r.failures.end(), std::back_inserter(report.failures));
    for (const auto& [label, v] : r.similarity) similarity[label].push_back(v);
  }
  for (const auto& [label, v] : similarity) {
    const auto ms = mean_std(v);
    report.similarity[label] = {ms.mean, ms.std, v.size()};
  }

  if (cfg.human_records) {
    const std::set<std::string> known_conditions(report.conditions.begin(), report.conditions.end());
    std::size_t skipped = 0;
    for (const auto& r : annotation::read_records(*cfg.human_records)) {
      const auto ref = references.find(r.audio_id);
      if (ref == references.end() || !known_conditions.contains(r.condition_label)) {
        ++skipped;
        continue;
      }
      const auto hyp = normalize_text(r.raw_text, Provenance::Human, r.audio_id);
      report.records.push_back({r.audio_id, r.condition_label, kHumanTranscriber, wer(ref->second, hyp)});
    }
    if (skipped) spdlog::warn("{} human records did not match the corpus or conditions", skipped);

    // keep records grouped by file then condition, machines before humans
    std::map<std::string, std::size_t> file_rank, cond_rank;
    for (std::size_t i = 0; i < corpus.size(); ++i) file_rank[corpus[i].stem] = i;
    for (std::size_t i = 0; i < report.conditions.size(); ++i) cond_rank[report.conditions[i]] = i;
    std::stable_sort(report.records.begin(), report.records.end(), [&](const WerRecord& a, const WerRecord& b) {
      return std::tuple(file_rank[a.audio_id], cond_rank[a.condition]) <
             std::tuple(file_rank[b.audio_id], cond_rank[b.condition]);
    });
  }

  report.aggregates = aggregate(report.conditions, report.transcribers, report.records, report.failures);
  return report;
}

std::string format_wer_cell(double mean, double std) { return fmt::format("{:.2f} ({:.2f})", mean, std); }

std::string format_similarity(double value) { return fmt::format("{:.6f}", value); }

std::string render_records_csv(const ExperimentReport& report) {
  std::string out = "audio_id,condition,transcriber,S,D,I,N,wer\n";
  for (const auto& r : report.records) {
    const auto& b = r.breakdown;
    out += fmt::format("{},{},{},{},{},{},{},{:.6f}\n", csv_field(r.audio_id), csv_field(r.condition),
                       csv_field(r.transcriber), b.substitutions, b.deletions, b.insertions, b.ref_len, b.wer);
  }
  return out;
}

std::string render_table1(const ExperimentReport& report) {
  std::string out = "| Audio Files |";
  std::string rule = "|---|";
  for (const auto& t : report.transcribers) {
    out += " " + t + " |";
    rule += "---|";
  }
  out += "\n" + rule + "\n";

  std::vector<std::string> notes;
  for (const auto& c : report.conditions) {
    out += "| " + c + " |";
    for (const auto& t : report.transcribers) {
      const auto it = report.aggregates.find({c, t});
      if (it == report.aggregates.end() || it->second.count == 0) {
        const std::size_t failed = it == report.aggregates.end() ? 0 : it->second.failures;
        if (failed) {
          notes.push_back(fmt::format("{} on {}: all {} transcriptions failed", t, c, failed));
          out += fmt::format(" —[^{}] |", notes.size());
        } else {
          out += " — |";
        }
      } else {
        out += " " + format_wer_cell(it->second.mean, it->second.std) + " |";
      }
    }
    out += "\n";
  }

  out += "\nMean (standard deviation) WER per condition and transcriber.\n";
  if (!notes.empty()) {
    out += "\n";
    for (std::size_t i = 0; i < notes.size(); ++i) out += fmt::format("[^{}]: {}\n", i + 1, notes[i]);
  }

  out += "\n| Counts |";
  for (const auto& t : report.transcribers) out += " " + t + " |";
  out += "\n" + rule + "\n";
  for (const auto& c : report.conditions) {
    out += "| " + c + " |";
    for (const auto& t : report.transcribers) {
      const auto it = report.aggregates.find({c, t});
      const std::size_t n = it == report.aggregates.end() ? 0 : it->second.count;
      const std::size_t failed = it == report.aggregates.end() ? 0 : it->second.failures;
      out += failed ? fmt::format(" {} ({} failed) |", n, failed) : fmt::format(" {} |", n);
    }
    out += "\n";
  }
  return out;
}

std::string render_table2(const ExperimentReport& report) {
  std::string out = "| Audio Files | Mean | Standard Deviation |\n|---|---|---|\n";
  for (const auto& c : report.conditions) {
    if (c.rfind("x+", 0) != 0) continue;
    const auto it = report.similarity.find(c);
    if (it == report.similarity.end()) {
      out += "| " + c + " | — | — |\n";
    } else {
      out += "| " + c + " | " + format_similarity(it->second.mean) + " | " + format_similarity(it->second.std) + " |\n";
    }
  }
  out += "\nCosine similarity between the original waveform and each attacked waveform.\n";
  return out;
}

void emit_report(const ExperimentReport& report, const fs::path& dir) {
  if (report.conditions.empty() || report.transcribers.empty()) {
    throw Error(ErrorKind::InvalidArgument, "report has no conditions or transcribers");
  }
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + (dir / name).string());
    out << text;
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + (dir / name).string());
  };

  write("records.csv", render_records_csv(report));

  std::string failures = "audio_id,condition,transcriber,error\n";
  for (const auto& f : report.failures) {
    failures += csv_field(f.audio_id) + "," + csv_field(f.condition) + "," + csv_field(f.transcriber) + "," +
                csv_field(f.error) + "\n";
  }
  write("failures.csv", failures);
  write("table1.md", render_table1(report));
  write("table2.md", render_table2(report));
}

}  // namespace advbench
