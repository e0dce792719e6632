#include "advbench/annotation_http.h"

#include <fstream>
#include <iterator>

#include <httplib.h>
#include <json.hpp>

#include "advbench/error.h"

namespace advbench::annotation {

using nlohmann::json;

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownAnnotator:
    case ErrorKind::UnknownCondition:
    case ErrorKind::NoRecords:
      return 404;
    case ErrorKind::DuplicateAnnotator:
      return 409;
    case ErrorKind::NotAssigned:
      return 403;
    case ErrorKind::InvalidArgument:
      return 400;
    default:
      return 500;
  }
}

namespace {

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", kind}, {"message", message}}.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_error(res, http_status_for(e.kind()), to_string(e.kind()), e.detail());
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

/// Parses a JSON object body and pulls the named string fields out of it.
std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res,
                               std::initializer_list<const char*> required) {
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    send_error(res, 400, "BadRequest", "body must be a JSON object");
    return std::nullopt;
  }
  for (const char* field : required) {
    if (!body.contains(field) || !body[field].is_string()) {
      send_error(res, 400, "BadRequest", std::string("missing string field '") + field + "'");
      return std::nullopt;
    }
  }
  return body;
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationStore& store;
  httplib::Server http;

  explicit Impl(AnnotationStore& s) : store(s) {}

  void routes(const std::optional<std::filesystem::path>& ui_dir);
};

void AnnotationServer::Impl::routes(const std::optional<std::filesystem::path>& ui_dir) {
  http.Post("/api/session", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res, {"annotator_id", "condition"});
    if (!body) return;
    const auto annotator = (*body)["annotator_id"].get<std::string>();
    const auto condition = (*body)["condition"].get<std::string>();
    try {
      const auto s = store.create_session(annotator, condition);
      send_json(res, {{"assigned_count", s.assigned_audio_ids.size()}, {"completed", 0}, {"resumed", false}});
    } catch (const Error& e) {
      // A returning annotator on the same condition resumes where they left off.
      if (e.kind() == ErrorKind::DuplicateAnnotator) {
        const auto existing = store.session(annotator);
        if (existing && existing->condition_label == condition) {
          const auto p = store.progress(annotator);
          send_json(res, {{"assigned_count", p.total}, {"completed", p.completed}, {"resumed", true}});
          return;
        }
      }
      send_error(res, e);
    }
  });

  http.Get("/api/next", [this](const httplib::Request& req, httplib::Response& res) {
    const auto annotator = req.get_param_value("annotator");
    try {
      const auto next = store.next_item(annotator);
      const auto p = store.progress(annotator);
      if (const auto* id = std::get_if<std::string>(&next)) {
        send_json(res, {{"audio_id", *id}, {"completed", p.completed}, {"total", p.total}});
      } else {
        send_json(res, {{"done", true}, {"completed", p.completed}, {"total", p.total}});
      }
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  http.Get(R"(/api/audio/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string audio_id = req.matches[1];
    std::optional<std::filesystem::path> path;
    if (req.has_param("annotator")) {
      const auto s = store.session(req.get_param_value("annotator"));
      if (!s) {
        send_error(res, 404, "UnknownAnnotator", "'" + req.get_param_value("annotator") + "'");
        return;
      }
      path = store.catalog().audio_path(s->condition_label, audio_id);
    } else {
      // Without an annotator the id must be unambiguous across conditions.
      int hits = 0;
      for (const auto& label : store.catalog().conditions()) {
        if (auto p = store.catalog().audio_path(label, audio_id)) {
          path = p;
          ++hits;
        }
      }
      if (hits > 1) {
        send_error(res, 400, "AmbiguousAudio", "'" + audio_id + "' exists in several conditions; pass ?annotator=");
        return;
      }
    }
    if (!path) {
      send_error(res, 404, "UnknownAudio", "'" + audio_id + "'");
      return;
    }
    std::ifstream in(*path, std::ios::binary);
    if (!in) {
      send_error(res, 500, "IoFailure", "cannot open audio");
      return;
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    res.set_content(std::move(bytes), "audio/wav");
  });

  http.Post("/api/transcription", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res, {"annotator_id", "audio_id", "text"});
    if (!body) return;
    try {
      store.submit((*body)["annotator_id"].get<std::string>(), (*body)["audio_id"].get<std::string>(),
                   (*body)["text"].get<std::string>());
      res.status = 204;
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  http.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
    try {
      res.set_content(store.export_text(), "text/plain; charset=utf-8");
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  if (ui_dir) http.set_mount_point("/", ui_dir->string());
}

AnnotationServer::AnnotationServer(AnnotationStore& store, std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(store)) {
  impl_->routes(ui_dir);
}

AnnotationServer::~AnnotationServer() { stop(); }

bool AnnotationServer::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

int AnnotationServer::bind_to_any_port(const std::string& host) { return impl_->http.bind_to_any_port(host); }

bool AnnotationServer::listen_after_bind() { return impl_->http.listen_after_bind(); }

void AnnotationServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

void AnnotationServer::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace advbench::annotation
