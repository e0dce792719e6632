#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "advbench/annotation.h"
#include "advbench/error.h"

namespace advbench::annotation {

/// JSON-over-HTTP front end for an AnnotationStore.
///
///   POST /api/session        {annotator_id, condition}       -> {assigned_count, completed, resumed}
///   GET  /api/next?annotator=                                -> {audio_id, completed, total} | {done: true, ...}
///   GET  /api/audio/<id>?annotator=                          -> audio/wav
///   POST /api/transcription  {annotator_id, audio_id, text}  -> 204
///   GET  /api/export                                         -> text/plain record dump
///
/// Errors come back as {"error": <kind>, "message": <detail>}.
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds and blocks until stop() is called. Returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it (or -1); serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status used for each library error kind.
int http_status_for(ErrorKind kind);

}  // namespace advbench::annotation
