#include "advbench/annotation.h"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "advbench/error.h"
#include "advbench/transcribers.h"

namespace advbench::annotation {

namespace fs = std::filesystem;

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case '\\': out += '\\'; break;
      default:
        out += '\\';
        out += s[i];
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string join_escaped_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    out += '\t';
    out += escape_field(id);
  }
  return out;
}

}  // namespace

std::string format_record_line(const AnnotationRecord& r) {
  return fmt::format("{}\t{}\t{}\t{}\t{}", escape_field(r.annotator_id), escape_field(r.audio_id),
                     escape_field(r.condition_label), escape_field(r.submitted_at), escape_field(r.raw_text));
}

std::optional<AnnotationRecord> parse_record_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = split_tabs(line);
  if (fields.size() != 5 || fields[0].empty() || fields[1].empty() || fields[2].empty()) return std::nullopt;
  return AnnotationRecord{unescape_field(fields[0]), unescape_field(fields[1]), unescape_field(fields[2]),
                          unescape_field(fields[4]), unescape_field(fields[3])};
}

std::vector<AnnotationRecord> latest_wins(const std::vector<AnnotationRecord>& records) {
  std::vector<AnnotationRecord> out;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.annotator_id, r.audio_id);
    if (auto it = slot.find(key); it != slot.end()) {
      out[it->second] = r;
    } else {
      slot.emplace(key, out.size());
      out.push_back(r);
    }
  }
  return out;
}

std::vector<AnnotationRecord> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::vector<AnnotationRecord> all;
  std::string line;
  while (std::getline(in, line)) {
    if (auto r = parse_record_line(line)) all.push_back(std::move(*r));
  }
  return latest_wins(all);
}

std::vector<std::string> assign_audio_ids(const std::vector<std::string>& candidates, const std::string& condition,
                                          std::uint64_t seed, std::size_t ordinal, std::size_t count) {
  std::vector<std::string> pool = candidates;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  const std::size_t take = std::min(count, pool.size());

  std::mt19937_64 rng(stable_hash(condition + "#" + std::to_string(ordinal), seed));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

ConditionCatalog ConditionCatalog::scan(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::IoFailure, "not a directory: " + dir.string());
  std::map<std::string, std::map<std::string, fs::path>> files;
  for (const auto& cond : fs::directory_iterator(dir)) {
    if (!cond.is_directory()) continue;
    auto& slot = files[cond.path().filename().string()];
    for (const auto& f : fs::directory_iterator(cond.path())) {
      if (f.is_regular_file() && f.path().extension() == ".wav") slot.emplace(f.path().stem().string(), f.path());
    }
  }
  return from_map(std::move(files));
}

ConditionCatalog ConditionCatalog::from_map(std::map<std::string, std::map<std::string, fs::path>> files) {
  ConditionCatalog c;
  c.files_ = std::move(files);
  return c;
}

std::vector<std::string> ConditionCatalog::audio_ids(const std::string& label) const {
  std::vector<std::string> ids;
  if (auto it = files_.find(label); it != files_.end()) {
    for (const auto& [id, _] : it->second) ids.push_back(id);
  }
  return ids;
}

std::optional<fs::path> ConditionCatalog::audio_path(const std::string& label, const std::string& audio_id) const {
  const auto it = files_.find(label);
  if (it == files_.end()) return std::nullopt;
  const auto f = it->second.find(audio_id);
  if (f == it->second.end()) return std::nullopt;
  return f->second;
}

std::vector<std::string> ConditionCatalog::conditions() const {
  std::vector<std::string> out;
  for (const auto& [label, _] : files_) out.push_back(label);
  return out;
}

AnnotationStore::AnnotationStore(ConditionCatalog catalog, fs::path records_path, std::uint64_t seed,
                                 std::size_t assignment_size, Clock clock)
    : catalog_(std::move(catalog)),
      records_path_(std::move(records_path)),
      seed_(seed),
      assignment_size_(assignment_size),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::system_clock::now(); })) {
  replay();
}

fs::path AnnotationStore::sessions_path() const {
  auto p = records_path_;
  p += ".sessions";
  return p;
}

std::string AnnotationStore::now_iso8601() const {
  const auto t = std::chrono::time_point_cast<std::chrono::milliseconds>(clock_());
  const auto ms = t.time_since_epoch().count() % 1000;
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03d}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(t)), ms);
}

void AnnotationStore::replay() {
  if (fs::exists(sessions_path())) {
    std::ifstream in(sessions_path());
    std::string line;
    while (std::getline(in, line)) {
      const auto f = split_tabs(line);
      // annotator, condition, seed, ordinal, created_at, then one field per assigned id
      if (f.size() < 5) continue;
      AnnotationSession s;
      s.annotator_id = unescape_field(f[0]);
      s.condition_label = unescape_field(f[1]);
      s.seed = std::stoull(std::string(f[2]));
      s.ordinal = std::stoull(std::string(f[3]));
      s.created_at = unescape_field(f[4]);
      for (std::size_t i = 5; i < f.size(); ++i) s.assigned_audio_ids.push_back(unescape_field(f[i]));
      sessions_.emplace(s.annotator_id, std::move(s));
    }
  }
  if (fs::exists(records_path_)) {
    std::ifstream in(records_path_);
    std::string line;
    while (std::getline(in, line)) {
      auto r = parse_record_line(line);
      if (!r) continue;
      if (auto it = sessions_.find(r->annotator_id); it != sessions_.end()) it->second.completed[r->audio_id] = r->raw_text;
      records_.push_back(std::move(*r));
    }
  }
}

void AnnotationStore::append_line(const fs::path& path, const std::string& line) {
  std::lock_guard lock(write_mutex_);
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot append to " + path.string());
  out << line << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "append failed for " + path.string());
}

AnnotationSession AnnotationStore::create_session(const std::string& annotator_id, const std::string& condition) {
  if (annotator_id.empty()) throw Error(ErrorKind::InvalidArgument, "annotator id must not be empty");
  if (!catalog_.has_condition(condition)) throw Error(ErrorKind::UnknownCondition, "'" + condition + "'");

  std::unique_lock lock(state_mutex_);
  if (sessions_.contains(annotator_id)) {
    throw Error(ErrorKind::DuplicateAnnotator, "'" + annotator_id + "' already has a session");
  }
  AnnotationSession s;
  s.annotator_id = annotator_id;
  s.condition_label = condition;
  s.seed = seed_;
  s.ordinal = sessions_.size();
  s.created_at = now_iso8601();
  s.assigned_audio_ids = assign_audio_ids(catalog_.audio_ids(condition), condition, seed_, s.ordinal, assignment_size_);

  append_line(sessions_path(), fmt::format("{}\t{}\t{}\t{}\t{}{}", escape_field(s.annotator_id),
                                           escape_field(s.condition_label), s.seed, s.ordinal,
                                           escape_field(s.created_at), join_escaped_ids(s.assigned_audio_ids)));
  sessions_.emplace(annotator_id, s);
  return s;
}

NextItem AnnotationStore::next_item(const std::string& annotator_id) const {
  std::shared_lock lock(state_mutex_);
  const auto it = sessions_.find(annotator_id);
  if (it == sessions_.end()) throw Error(ErrorKind::UnknownAnnotator, "'" + annotator_id + "'");
  for (const auto& id : it->second.assigned_audio_ids) {
    if (!it->second.completed.contains(id)) return id;
  }
  return Done{};
}

void AnnotationStore::submit(const std::string& annotator_id, const std::string& audio_id,
                             const std::string& raw_text) {
  std::unique_lock lock(state_mutex_);
  const auto it = sessions_.find(annotator_id);
  if (it == sessions_.end()) throw Error(ErrorKind::UnknownAnnotator, "'" + annotator_id + "'");
  auto& s = it->second;
  if (std::find(s.assigned_audio_ids.begin(), s.assigned_audio_ids.end(), audio_id) == s.assigned_audio_ids.end()) {
    throw Error(ErrorKind::NotAssigned, "'" + audio_id + "' is not assigned to '" + annotator_id + "'");
  }
  AnnotationRecord r{annotator_id, audio_id, s.condition_label, raw_text, now_iso8601()};
  append_line(records_path_, format_record_line(r));
  s.completed[audio_id] = raw_text;
  records_.push_back(std::move(r));
}

std::string AnnotationStore::export_text() const {
  std::shared_lock lock(state_mutex_);
  if (records_.empty()) throw Error(ErrorKind::NoRecords, "nothing has been submitted");
  std::string out;
  for (const auto& r : latest_wins(records_)) {
    out += format_record_line(r);
    out += '\n';
  }
  return out;
}

fs::path AnnotationStore::export_records(const fs::path& dir) const {
  const auto text = export_text();
  fs::create_directories(dir);
  const auto path = dir / "human_records.tsv";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
  return path;
}

std::optional<AnnotationSession> AnnotationStore::session(const std::string& annotator_id) const {
  std::shared_lock lock(state_mutex_);
  if (auto it = sessions_.find(annotator_id); it != sessions_.end()) return it->second;
  return std::nullopt;
}

Progress AnnotationStore::progress(const std::string& annotator_id) const {
  std::shared_lock lock(state_mutex_);
  const auto it = sessions_.find(annotator_id);
  if (it == sessions_.end()) throw Error(ErrorKind::UnknownAnnotator, "'" + annotator_id + "'");
  return {it->second.completed.size(), it->second.assigned_audio_ids.size()};
}

}  // namespace advbench::annotation
