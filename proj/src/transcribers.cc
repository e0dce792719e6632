#include "advbench/transcribers.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "advbench/error.h"
#include "advbench/kv_file.h"
#include "advbench/subprocess.h"

namespace advbench {

namespace {

constexpr std::string_view kPlaceholder = "{input}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

bool is_unsigned_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(ErrorKind::ConfigInvalid, key + ": not a number: '" + value + "'");
  }
  return out;
}

}  // namespace

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ (seed * 0x9e3779b97f4a7c15ull);
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

TranscriberDescriptor TranscriberDescriptor::load(const std::filesystem::path& path) {
  const auto kv = KvFile::load(path);
  TranscriberDescriptor d;
  try {
    d.name = kv.get_or("name", "");
    const auto kind = kv.get_or("kind", "");
    if (kind == "external" || kind == "external-command" || kind == "ExternalCommand") {
      d.kind = TranscriberKind::ExternalCommand;
    } else if (kind == "mock" || kind == "Mock") {
      d.kind = TranscriberKind::Mock;
    } else {
      throw Error(ErrorKind::ConfigInvalid, "kind must be 'external' or 'mock', got '" + kind + "'");
    }
    d.command_template = kv.get_or("command", "");
    if (auto v = kv.get("timeout_s")) d.timeout_s = parse_double("timeout_s", *v);
    if (auto v = kv.get("dropout")) d.mock_dropout = parse_double("dropout", *v);
    if (auto v = kv.get("seed")) d.mock_seed = static_cast<std::uint64_t>(parse_double("seed", *v));
    d.validate();
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
  return d;
}

void TranscriberDescriptor::validate() const {
  if (name.empty()) throw Error(ErrorKind::ConfigInvalid, "transcriber needs a name");
  if (!(timeout_s > 0.0) || !std::isfinite(timeout_s)) {
    throw Error(ErrorKind::ConfigInvalid, "timeout_s must be positive");
  }
  if (kind == TranscriberKind::ExternalCommand && count_occurrences(command_template, kPlaceholder) != 1) {
    throw Error(ErrorKind::ConfigInvalid, "command must contain {input} exactly once");
  }
  if (kind == TranscriberKind::Mock && !(mock_dropout >= 0.0 && mock_dropout <= 1.0)) {
    throw Error(ErrorKind::ConfigInvalid, "dropout must lie in [0, 1]");
  }
}

CommandTranscriber::CommandTranscriber(TranscriberDescriptor desc) : desc_(std::move(desc)) { desc_.validate(); }

std::string CommandTranscriber::render_command(const std::filesystem::path& audio_path) const {
  std::string cmd = desc_.command_template;
  const auto pos = cmd.find(kPlaceholder);
  cmd.replace(pos, kPlaceholder.size(), shell_quote(audio_path.string()));
  return cmd;
}

std::string CommandTranscriber::transcribe(const std::filesystem::path& audio_path) const {
  if (!std::filesystem::exists(audio_path)) {
    throw Error(ErrorKind::IoFailure, "no such audio file " + audio_path.string());
  }
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(desc_.timeout_s * 1000.0));
  auto result = run_shell(render_command(audio_path), timeout);
  if (result.timed_out) {
    throw Error(ErrorKind::Timeout, desc_.name + " exceeded " + std::to_string(desc_.timeout_s) + " s");
  }
  if (result.exit_code != 0) {
    auto err = trim(result.stderr_text);
    if (err.size() > 200) err.resize(200);
    throw Error(ErrorKind::CommandFailed,
                desc_.name + " exited with " + std::to_string(result.exit_code) + (err.empty() ? "" : ": " + err));
  }
  return std::move(result.stdout_text);
}

MockTranscriber::MockTranscriber(TranscriberDescriptor desc, FixtureMap fixtures)
    : desc_(std::move(desc)), fixtures_(std::move(fixtures)) {
  desc_.validate();
}

std::string MockTranscriber::transcribe(const std::filesystem::path& audio_path) const {
  const auto stem = audio_path.stem().string();
  const auto it = fixtures_.find(stem);
  if (it == fixtures_.end()) throw Error(ErrorKind::MissingFixture, "no reference for '" + stem + "'");

  const auto key = audio_path.parent_path().filename().string() + "/" + stem;
  std::mt19937_64 rng(stable_hash(key, desc_.mock_seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string out;
  for (const auto& word : it->second.words) {
    // always draw so the pattern is independent of the rate's edge cases
    const bool drop = unit(rng) < desc_.mock_dropout;
    if (drop) continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::unique_ptr<Transcriber> make_transcriber(const TranscriberDescriptor& desc, const FixtureMap& fixtures) {
  switch (desc.kind) {
    case TranscriberKind::ExternalCommand:
      return std::make_unique<CommandTranscriber>(desc);
    case TranscriberKind::Mock:
      return std::make_unique<MockTranscriber>(desc, fixtures);
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown transcriber kind");
}

Transcript load_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::istringstream tokens(text);
  std::string first, second;
  std::string_view body = text;
  if (tokens >> first >> second && is_unsigned_integer(first) && is_unsigned_integer(second)) {
    const auto consumed = tokens.tellg();
    body = consumed < 0 ? std::string_view{} : std::string_view(text).substr(static_cast<std::size_t>(consumed));
  }
  auto t = normalize_text(body, Provenance::Reference, path.stem().string());
  if (t.words.empty()) throw Error(ErrorKind::EmptyReference, path.string() + " has no words");
  return t;
}

}  // namespace advbench
