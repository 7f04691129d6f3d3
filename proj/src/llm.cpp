#include "rhyme/llm.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <thread>

#include "rhyme/error.hpp"
#include "rhyme/text.hpp"
#include "rhyme/union_find.hpp"

namespace rhyme {
namespace {

// Soft-wrapped in the original; each wrapped line keeps its trailing space.
constexpr std::string_view kInstruction =
    "You are an expert in poetry. Your task is to identify end-of-line "
    "rhymes in the given text. Focus exclusively on rhymes that occur "
    "at the end of each line. Ignore internal or slant rhymes unless "
    "they match at the end of the line.  Return your output as a JSON "
    "object containing lists of rhyming words, grouped together. If a "
    "word appears in multiple rhyming lines, repeat it in the output "
    "as many times as it appears.";

constexpr std::string_view kExample =
    "EXAMPLE:\n"
    "Text: \n"
    "There was an Old Man with a beard,\n"
    "Who said, 'It is just as I feared!\n"
    "Two Owls and a Hen,\n"
    "Four Larks and a Wren,\n"
    "Have all built their nests in my beard!'\n"
    "{\"rhymes\": [[\"beard\", \"feared\", \"beard\"], [\"hen\", \"wren\"]]}: ";

constexpr std::string_view kTaskPrefix = "Text: \n";

// End of the balanced {...} starting at `open`, honoring JSON strings.
std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string safe_file_component(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

ProviderConfig provider_config_from_json(const nlohmann::json& doc) {
  ProviderConfig c;
  try {
    c.endpoint_url = doc.at("endpoint_url").get<std::string>();
    c.model_name = doc.at("model_name").get<std::string>();
    c.auth_token_env = doc.value("auth_token_env", std::string());
    c.max_retries = doc.value("max_retries", c.max_retries);
    c.timeout_s = doc.value("timeout_s", c.timeout_s);
    c.rate_limit_rpm = doc.value("rate_limit_rpm", c.rate_limit_rpm);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed provider config: ") + e.what());
  }
  if (c.endpoint_url.rfind("http://", 0) != 0 && c.endpoint_url.rfind("https://", 0) != 0) {
    throw SchemaError("endpoint_url must start with http:// or https://");
  }
  if (c.model_name.empty()) throw SchemaError("model_name is empty");
  if (!(c.timeout_s > 0)) throw SchemaError("timeout_s must be positive");
  if (c.rate_limit_rpm < 0) throw SchemaError("rate_limit_rpm must be >= 0");
  return c;
}

ProviderConfig load_provider_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open provider config " + path.string());
  try {
    return provider_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::vector<ChatMessage> Prompt::messages() const {
  return {{"user", instruction}, {"assistant", example}, {"user", task}};
}

std::string poem_text(const Poem& poem) {
  std::string out;
  for (std::size_t i = 0; i < poem.lines.size(); ++i) {
    if (i > 0) {
      out += '\n';
      if (poem.lines[i].stanza_index != poem.lines[i - 1].stanza_index) out += '\n';
    }
    out += poem.lines[i].text;
  }
  return out;
}

Prompt build_prompt(const Poem& poem) {
  if (poem.lines.empty()) throw ValidationError("poem " + poem.id + " has no lines");
  return {std::string(kInstruction), std::string(kExample),
          std::string(kTaskPrefix) + poem_text(poem)};
}

RhymeGroups parse_response(std::string_view raw) {
  bool parsed_any = false;
  for (std::size_t open = raw.find('{'); open != std::string_view::npos;
       open = raw.find('{', open + 1)) {
    const auto close = matching_brace(raw, open);
    if (!close) continue;
    const auto doc =
        nlohmann::json::parse(raw.substr(open, *close - open + 1), nullptr, false);
    if (doc.is_discarded()) continue;
    parsed_any = true;
    if (!doc.is_object() || !doc.contains("rhymes")) continue;

    const auto& rhymes = doc.at("rhymes");
    if (!rhymes.is_array()) throw ResponseShapeError("\"rhymes\" is not a list");
    RhymeGroups out;
    for (const auto& group : rhymes) {
      if (!group.is_array()) throw ResponseShapeError("\"rhymes\" entries must be lists");
      std::vector<std::string> words;
      for (const auto& w : group) {
        if (!w.is_string() || w.get<std::string>().empty()) {
          throw ResponseShapeError("rhyme groups must hold non-empty strings");
        }
        words.push_back(w.get<std::string>());
      }
      if (words.size() < 2) {
        ++out.dropped_singletons;
        spdlog::warn("dropping rhyme group with {} word(s)", words.size());
        continue;
      }
      out.groups.push_back(std::move(words));
    }
    return out;
  }
  if (parsed_any) throw ResponseShapeError("no JSON object with a \"rhymes\" key");
  throw ResponseParseError("no JSON object found in response", std::string(raw));
}

std::optional<std::string> normalize_response_word(std::string_view word) {
  auto tokens = text::words(word);
  if (tokens.empty()) return std::nullopt;
  return std::move(tokens.back());
}

MappedChains map_groups_to_lines(const RhymeGroups& groups, const Poem& poem) {
  std::vector<std::optional<std::string>> finals;
  finals.reserve(poem.lines.size());
  for (const auto& line : poem.lines) finals.push_back(line_final_word(line));

  MappedChains out;
  UnionFind uf(poem.lines.size());
  for (const auto& group : groups.groups) {
    std::vector<char> used(poem.lines.size(), 0);
    std::vector<std::size_t> lines;
    for (const auto& word : group) {
      const auto w = normalize_response_word(word);
      std::optional<std::size_t> hit;
      if (w) {
        for (std::size_t i = 0; i < finals.size(); ++i) {
          if (!used[i] && finals[i] == *w) {
            hit = i;
            break;
          }
        }
      }
      if (!hit) {
        ++out.unmatched_words;
        continue;
      }
      used[*hit] = 1;
      lines.push_back(*hit);
    }
    if (lines.size() < 2) continue;
    for (const auto line : lines) uf.unite(lines[0], line);
  }
  out.chains = uf.groups(2);
  if (out.unmatched_words > 0) {
    spdlog::info("poem {}: {} response word(s) matched no line end", poem.id,
                 out.unmatched_words);
  }
  return out;
}

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {}

nlohmann::json HttpChatProvider::request_body(const std::string& model,
                                              const std::vector<ChatMessage>& messages) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", model}, {"messages", std::move(msgs)}, {"temperature", 0}};
}

std::string HttpChatProvider::complete(const std::vector<ChatMessage>& messages,
                                       const std::string&) {
  const auto& url = config_.endpoint_url;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Headers headers;
  if (!config_.auth_token_env.empty()) {
    const char* token = std::getenv(config_.auth_token_env.c_str());
    if (!token || !*token) {
      throw ProviderError("environment variable " + config_.auth_token_env + " is not set",
                          false);
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  httplib::Client client(origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const auto res = client.Post(path, headers, request_body(config_.model_name, messages).dump(),
                               "application/json");
  if (!res) {
    throw ProviderError("request failed: " + httplib::to_string(res.error()), true);
  }
  if (res->status == 429 || res->status >= 500) {
    throw ProviderError(fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 200)), true);
  }
  if (res->status != 200) {
    throw ProviderError(fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 200)), false);
  }
  const auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw ProviderError("provider returned non-JSON body", false);
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ProviderError("provider response lacks choices[0].message.content", false);
  }
}

ReplayProvider::ReplayProvider(const std::filesystem::path& archive_dir) {
  if (!std::filesystem::is_directory(archive_dir)) {
    throw ValidationError("archive directory not found: " + archive_dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(archive_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("poem_id") || !doc.contains("raw")) {
      throw SchemaError("bad archive entry " + f.string());
    }
    raw_by_poem_[doc.at("poem_id").get<std::string>()] = doc.at("raw").get<std::string>();
    model_ = doc.value("model", model_);
  }
}

std::string ReplayProvider::complete(const std::vector<ChatMessage>&, const std::string& poem_id) {
  auto it = raw_by_poem_.find(poem_id);
  if (it == raw_by_poem_.end()) {
    throw ProviderError("no archived response for poem " + poem_id, false);
  }
  return it->second;
}

RateLimiter::RateLimiter(double requests_per_minute) {
  if (requests_per_minute > 0) {
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(60.0 / requests_per_minute));
  }
}

void RateLimiter::acquire() {
  if (interval_ == std::chrono::steady_clock::duration::zero()) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

BenchmarkReport run_benchmark(ChatProvider& provider, const std::vector<const Poem*>& poems,
                              const std::vector<AnnotationSet>& gold,
                              const BenchmarkOptions& options) {
  if (gold.empty()) throw ValidationError("benchmark needs at least one gold annotation set");
  if (options.archive_dir) std::filesystem::create_directories(*options.archive_dir);

  BenchmarkReport report;
  report.language = options.language;
  report.model = provider.model();
  for (const auto& g : gold) report.annotators.push_back(g.annotator);
  report.poems.resize(poems.size());

  RateLimiter limiter(options.rate_limit_rpm);
  std::mutex archive_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t idx = next++; idx < poems.size(); idx = next++) {
      const Poem& poem = *poems[idx];
      PoemOutcome& outcome = report.poems[idx];
      outcome.poem_id = poem.id;
      std::optional<std::string> raw;
      try {
        const auto messages = build_prompt(poem).messages();
        for (std::size_t attempt = 0; attempt <= options.max_retries && !raw; ++attempt) {
          if (attempt > 0) std::this_thread::sleep_for(options.backoff_base * (1 << (attempt - 1)));
          limiter.acquire();
          ++outcome.attempts;
          try {
            raw = provider.complete(messages, poem.id);
          } catch (const ProviderError& e) {
            outcome.error = e.what();
            if (!e.retryable()) break;
          }
        }
        if (!raw) {
          outcome.failed = true;
          continue;
        }
        if (options.archive_dir) {
          const nlohmann::json entry = {{"poem_id", poem.id},
                                        {"model", report.model},
                                        {"timestamp", utc_timestamp()},
                                        {"request_id", fmt::format("{:06d}", idx)},
                                        {"temperature", 0},
                                        {"raw", *raw}};
          const auto file = *options.archive_dir /
                            fmt::format("{:06d}-{}.json", idx, safe_file_component(poem.id));
          std::lock_guard lock(archive_mutex);
          std::ofstream out(file, std::ios::binary | std::ios::trunc);
          out << entry.dump(1) << '\n';
        }
        const auto mapped = map_groups_to_lines(parse_response(*raw), poem);
        outcome.chains = mapped.chains;
        outcome.unmatched_words = mapped.unmatched_words;
        outcome.error.clear();
      } catch (const Error& e) {
        outcome.failed = true;
        outcome.error = e.what();
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.concurrency, 1, 64);
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  for (std::size_t k = 0; k < gold.size(); ++k) {
    LinkCounts counts;
    bool any = false;
    for (const auto& outcome : report.poems) {
      if (outcome.failed) continue;
      auto it = gold[k].poems.find(outcome.poem_id);
      if (it == gold[k].poems.end()) continue;
      counts.add(chains_to_links(outcome.poem_id, outcome.chains), chains_to_links(it->second));
      any = true;
    }
    report.pooled.push_back(any ? std::optional<double>(counts.f1_or_one()) : std::nullopt);
  }
  for (const auto& outcome : report.poems) {
    if (outcome.failed) {
      ++report.failed;
      spdlog::warn("poem {} failed: {}", outcome.poem_id, outcome.error);
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const std::vector<BenchmarkReport>& reports) {
  out << "language,model,annotator,f1,failed_poems\n";
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.annotators.size(); ++k) {
      const auto f1 = r.pooled[k] ? fmt::format("{:.4f}", *r.pooled[k]) : std::string("NA");
      out << fmt::format("{},{},{},{},{}\n", r.language, r.model, r.annotators[k], f1, r.failed);
    }
  }
}

}  // namespace rhyme
