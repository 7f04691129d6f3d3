#include "rhyme/server.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "rhyme/error.hpp"
#include "rhyme/evaluation.hpp"

namespace rhyme {
namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

std::string quoted(const std::string& version) { return "\"" + version + "\""; }

std::string unquote(std::string s) {
  if (s.rfind("W/", 0) == 0) s.erase(0, 2);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

bool is_safe_poem_id(std::string_view id) {
  return !id.empty() && id != "." && id != ".." && id.find('/') == std::string_view::npos &&
         id.find('\\') == std::string_view::npos && id.find('\0') == std::string_view::npos;
}

}  // namespace

std::string resource_version(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return "0";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return fmt::format("{:016x}", h);
}

bool is_valid_annotator_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

struct AnnotationServer::Impl {
  const Corpus& corpus;
  ServerOptions options;
  httplib::Server server;
  std::mutex locks_mutex;
  std::map<std::string, std::shared_ptr<std::mutex>> locks;

  Impl(const Corpus& c, ServerOptions o) : corpus(c), options(std::move(o)) {}

  std::shared_ptr<std::mutex> lock_for(const std::string& key) {
    std::lock_guard guard(locks_mutex);
    auto& m = locks[key];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

  std::filesystem::path annotation_path(const std::string& annotator,
                                        const std::string& poem_id) const {
    return options.annotations_dir / annotator / (poem_id + ".json");
  }

  // Resolves path parameters; sends the error response and returns nullptr
  // when they are not acceptable.
  const Poem* resolve(const httplib::Request& req, httplib::Response& res) const {
    const std::string annotator = req.matches[1];
    const std::string poem_id = req.matches[2];
    if (!is_valid_annotator_id(annotator)) {
      send_error(res, 400, "annotator ids may only contain letters, digits, '_' and '-'");
      return nullptr;
    }
    const Poem* poem = corpus.find(poem_id);
    if (!poem) {
      send_error(res, 404, "unknown poem " + poem_id);
      return nullptr;
    }
    if (!is_safe_poem_id(poem_id)) {
      send_error(res, 400, "poem id cannot be stored as a file name");
      return nullptr;
    }
    return poem;
  }

  void routes() {
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (!options.bearer_token || req.path.rfind("/api/", 0) != 0) {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      if (req.get_header_value("Authorization") != "Bearer " + *options.bearer_token) {
        send_error(res, 401, "missing or wrong bearer token");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });

    server.Get("/api/poems", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& p : corpus.poems()) {
        out.push_back({{"id", p.id},
                       {"title", p.title ? nlohmann::json(*p.title) : nlohmann::json(nullptr)},
                       {"language", p.language},
                       {"line_count", p.size()}});
      }
      send_json(res, 200, out);
    });

    server.Get(R"(/api/poems/([^/]+))", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      const Poem* p = corpus.find(std::string(req.matches[1]));
      if (!p) return send_error(res, 404, "unknown poem");
      nlohmann::json stanzas = nlohmann::json::array();
      for (const auto& line : p->lines) {
        if (stanzas.size() <= line.stanza_index) stanzas.push_back(nlohmann::json::array());
        stanzas.back().push_back(line.text);
      }
      send_json(res, 200,
                {{"id", p->id},
                 {"title", p->title ? nlohmann::json(*p->title) : nlohmann::json(nullptr)},
                 {"language", p->language},
                 {"stanzas", std::move(stanzas)}});
    });

    server.Get(R"(/api/annotations/([^/]+)/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const Poem* poem = resolve(req, res);
                 if (!poem) return;
                 const auto path = annotation_path(req.matches[1], poem->id);
                 auto guard = lock_for(path.string());
                 std::lock_guard lock(*guard);
                 std::ifstream in(path, std::ios::binary);
                 if (!in) return send_error(res, 404, "no annotation yet");
                 std::stringstream ss;
                 ss << in.rdbuf();
                 res.set_header("ETag", quoted(resource_version(path)));
                 res.status = 200;
                 res.set_content(ss.str(), "application/json");
               });

    server.Put(R"(/api/annotations/([^/]+)/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const Poem* poem = resolve(req, res);
                 if (!poem) return;
                 const std::string annotator = req.matches[1];
                 if (!req.has_header("If-Match")) {
                   return send_error(res, 428, "If-Match with the current version is required");
                 }
                 Annotation ann;
                 try {
                   const auto doc = nlohmann::json::parse(req.body);
                   ann = annotation_from_json(doc);
                   validate(ann, poem->size());
                 } catch (const nlohmann::json::parse_error& e) {
                   return send_error(res, 400, std::string("body is not JSON: ") + e.what());
                 } catch (const ValidationError& e) {
                   return send_error(res, 422, e.what());
                 }
                 if (ann.annotator != annotator || ann.poem_id != poem->id) {
                   return send_error(res, 422, "annotator/poem_id in body do not match the URL");
                 }
                 const auto path = annotation_path(annotator, poem->id);
                 auto guard = lock_for(path.string());
                 std::lock_guard lock(*guard);
                 const std::string current = resource_version(path);
                 if (unquote(req.get_header_value("If-Match")) != current) {
                   res.set_header("ETag", quoted(current));
                   return send_json(res, 409,
                                    {{"error", "version conflict"}, {"current_version", current}});
                 }
                 std::filesystem::create_directories(path.parent_path());
                 auto tmp = path;
                 tmp += ".tmp";
                 {
                   std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                   out << annotation_to_json(ann).dump() << '\n';
                   if (!out) return send_error(res, 500, "cannot write annotation");
                 }
                 std::filesystem::rename(tmp, path);
                 res.set_header("ETag", quoted(resource_version(path)));
                 res.status = 204;
               });

    server.Get(R"(/api/progress/([^/]+))", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
      const std::string annotator = req.matches[1];
      if (!is_valid_annotator_id(annotator)) return send_error(res, 400, "bad annotator id");
      std::size_t annotated = 0;
      for (const auto& p : corpus.poems()) {
        if (is_safe_poem_id(p.id) && std::filesystem::exists(annotation_path(annotator, p.id))) {
          ++annotated;
        }
      }
      send_json(res, 200, {{"annotated", annotated}, {"total", corpus.poems().size()}});
    });

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            send_error(res, 500, e.what());
          } catch (...) {
            send_error(res, 500, "internal error");
          }
        });

    if (options.static_dir && !server.set_mount_point("/", options.static_dir->string())) {
      throw ValidationError("static directory not found: " + options.static_dir->string());
    }
  }
};

AnnotationServer::AnnotationServer(const Corpus& corpus, ServerOptions options)
    : impl_(std::make_unique<Impl>(corpus, std::move(options))) {
  std::filesystem::create_directories(impl_->options.annotations_dir);
  impl_->routes();
}

AnnotationServer::~AnnotationServer() = default;

int AnnotationServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(fmt::format("cannot bind {}:{}", host, port));
  return bound;
}

void AnnotationServer::run() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() { impl_->server.stop(); }

}  // namespace rhyme
