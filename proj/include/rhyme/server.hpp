#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "rhyme/corpus.hpp"

namespace rhyme {

struct ServerOptions {
  std::filesystem::path annotations_dir;  // <dir>/<annotator>/<poem_id>.json
  std::optional<std::filesystem::path> static_dir;
  std::optional<std::string> bearer_token;  // required on /api/* when set
};

// JSON API for the annotation UI. The corpus is read-only; annotations are
// the only writable resource. Writes use optimistic concurrency: every
// annotation has a version (ETag), "0" when absent, and PUT must send the
// current version in If-Match.
class AnnotationServer {
 public:
  AnnotationServer(const Corpus& corpus, ServerOptions options);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Binds to host:port (port 0 picks a free port) and returns the port.
  int bind(const std::string& host, int port);
  void run();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// FNV-1a 64 of the file bytes as 16 hex digits, or "0" when absent.
std::string resource_version(const std::filesystem::path& file);

bool is_valid_annotator_id(std::string_view id);

}  // namespace rhyme
