#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

namespace advbench::annotation {

inline constexpr std::size_t kDefaultAssignmentSize = 34;

/// One typed transcription. `raw_text` is stored exactly as submitted.
struct AnnotationRecord {
  std::string annotator_id;
  std::string audio_id;
  std::string condition_label;
  std::string raw_text;
  std::string submitted_at;  // ISO-8601 UTC

  bool operator==(const AnnotationRecord&) const = default;
};

struct AnnotationSession {
  std::string annotator_id;
  std::string condition_label;
  std::vector<std::string> assigned_audio_ids;
  std::map<std::string, std::string> completed;  // audio_id -> latest raw text
  std::string created_at;
  std::uint64_t seed = 0;
  std::size_t ordinal = 0;

  std::size_t completed_count() const noexcept { return completed.size(); }
};

// Record line format: five tab-separated fields
//   annotator_id  audio_id  condition  submitted_at  raw_text
// with backslash escapes (\\ \t \n \r) applied to every field.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);
std::string format_record_line(const AnnotationRecord& r);
/// Returns nullopt for a malformed or truncated line.
std::optional<AnnotationRecord> parse_record_line(std::string_view line);

/// Reads a record file, skipping malformed lines, and collapses resubmissions
/// so the latest line per (annotator, audio) wins. Output keeps first-seen order.
std::vector<AnnotationRecord> read_records(const std::filesystem::path& path);
std::vector<AnnotationRecord> latest_wins(const std::vector<AnnotationRecord>& records);

/// Deterministic sample of up to `count` distinct ids. Depends only on the
/// inputs (condition, seed, ordinal) and the candidate list.
std::vector<std::string> assign_audio_ids(const std::vector<std::string>& candidates, const std::string& condition,
                                          std::uint64_t seed, std::size_t ordinal,
                                          std::size_t count = kDefaultAssignmentSize);

/// Conditions discovered on disk: `<dir>/<condition>/<audio_id>.wav`.
class ConditionCatalog {
 public:
  static ConditionCatalog scan(const std::filesystem::path& dir);
  static ConditionCatalog from_map(std::map<std::string, std::map<std::string, std::filesystem::path>> files);

  bool has_condition(const std::string& label) const { return files_.contains(label); }
  std::vector<std::string> audio_ids(const std::string& label) const;
  std::optional<std::filesystem::path> audio_path(const std::string& label, const std::string& audio_id) const;
  std::vector<std::string> conditions() const;

 private:
  std::map<std::string, std::map<std::string, std::filesystem::path>> files_;
};

struct Done {};
using NextItem = std::variant<std::string, Done>;

struct Progress {
  std::size_t completed = 0;
  std::size_t total = 0;
};

/// Session and record bookkeeping for the human transcription protocol.
///
/// Sessions are appended to `<records>.sessions` and transcriptions to
/// `<records>`; both are line-oriented and replayed on construction. All file
/// writes go through one mutex; session state sits behind a shared mutex.
class AnnotationStore {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  AnnotationStore(ConditionCatalog catalog, std::filesystem::path records_path, std::uint64_t seed,
                  std::size_t assignment_size = kDefaultAssignmentSize, Clock clock = {});

  /// Throws DuplicateAnnotator or UnknownCondition.
  AnnotationSession create_session(const std::string& annotator_id, const std::string& condition);
  /// Throws UnknownAnnotator.
  NextItem next_item(const std::string& annotator_id) const;
  /// Throws UnknownAnnotator or NotAssigned.
  void submit(const std::string& annotator_id, const std::string& audio_id, const std::string& raw_text);
  /// Writes the latest-wins record dump to `<dir>/human_records.tsv`. Throws NoRecords.
  std::filesystem::path export_records(const std::filesystem::path& dir) const;
  /// The same dump as text.
  std::string export_text() const;

  std::optional<AnnotationSession> session(const std::string& annotator_id) const;
  Progress progress(const std::string& annotator_id) const;
  const ConditionCatalog& catalog() const noexcept { return catalog_; }
  std::filesystem::path sessions_path() const;

 private:
  std::string now_iso8601() const;
  void replay();
  void append_line(const std::filesystem::path& path, const std::string& line);

  ConditionCatalog catalog_;
  std::filesystem::path records_path_;
  std::uint64_t seed_;
  std::size_t assignment_size_;
  Clock clock_;

  mutable std::shared_mutex state_mutex_;
  std::map<std::string, AnnotationSession> sessions_;
  std::vector<AnnotationRecord> records_;
  std::mutex write_mutex_;
};

}  // namespace advbench::annotation
