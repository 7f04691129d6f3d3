#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rhyme/corpus.hpp"
#include "rhyme/evaluation.hpp"

namespace rhyme {

struct ProviderConfig {
  std::string endpoint_url;  // OpenAI-style chat completions URL
  std::string model_name;
  std::string auth_token_env;  // name of the variable holding the bearer token
  std::size_t max_retries = 3;
  double timeout_s = 60.0;
  double rate_limit_rpm = 30.0;  // 0 disables the limiter
};

ProviderConfig provider_config_from_json(const nlohmann::json& doc);
ProviderConfig load_provider_config(const std::filesystem::path& path);

struct ChatMessage {
  std::string role;
  std::string content;
};

// The one-shot prompt: instruction block, worked limerick example, and the
// poem to annotate.
struct Prompt {
  std::string instruction;
  std::string example;
  std::string task;

  std::vector<ChatMessage> messages() const;
};

// Lines joined by newlines, stanzas separated by a blank line.
std::string poem_text(const Poem& poem);

Prompt build_prompt(const Poem& poem);

struct RhymeGroups {
  std::vector<std::vector<std::string>> groups;
  std::size_t dropped_singletons = 0;
};

// Finds the first JSON object with a "rhymes" key, tolerating prose and
// code fences around it.
RhymeGroups parse_response(std::string_view raw);

struct MappedChains {
  Chains chains;
  std::size_t unmatched_words = 0;
};

// Matches each returned word against line-final words, consuming lines in
// ascending order within a group. Groups covering fewer than two lines are
// dropped; chains sharing a line are merged.
MappedChains map_groups_to_lines(const RhymeGroups& groups, const Poem& poem);

// Word normalization used for matching: last word token, lowercased.
std::optional<std::string> normalize_response_word(std::string_view word);

// Throws ProviderError; retryable() tells the harness whether to try again.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages,
                               const std::string& poem_id) = 0;
  virtual std::string model() const = 0;
};

// POSTs {model, messages, temperature: 0} and returns
// choices[0].message.content. 429 and 5xx are retryable.
class HttpChatProvider final : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig config);
  std::string complete(const std::vector<ChatMessage>& messages,
                       const std::string& poem_id) override;
  std::string model() const override { return config_.model_name; }

  static nlohmann::json request_body(const std::string& model,
                                     const std::vector<ChatMessage>& messages);

 private:
  ProviderConfig config_;
};

// Serves raw responses from an archive directory for offline re-scoring.
// When a poem was requested several times the latest archived file wins.
class ReplayProvider final : public ChatProvider {
 public:
  explicit ReplayProvider(const std::filesystem::path& archive_dir);
  std::string complete(const std::vector<ChatMessage>& messages,
                       const std::string& poem_id) override;
  std::string model() const override { return model_; }

 private:
  std::string model_;
  std::map<std::string, std::string> raw_by_poem_;
};

// Spaces request starts at least 60/rpm seconds apart.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute);
  void acquire();

 private:
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
  std::mutex mutex_;
};

struct BenchmarkOptions {
  std::string language;
  std::optional<std::filesystem::path> archive_dir;  // raw responses are written here
  std::size_t max_retries = 3;
  std::size_t concurrency = 2;
  double rate_limit_rpm = 0.0;
  std::chrono::milliseconds backoff_base{500};
};

struct PoemOutcome {
  std::string poem_id;
  bool failed = false;
  std::string error;
  Chains chains;
  std::size_t unmatched_words = 0;
  std::size_t attempts = 0;
};

struct BenchmarkReport {
  std::string language;
  std::string model;
  std::vector<std::string> annotators;
  std::vector<PoemOutcome> poems;             // input order
  std::vector<std::optional<double>> pooled;  // per annotator; nullopt when no poem succeeded
  std::size_t failed = 0;
};

// One request per poem with retries and exponential backoff; responses are
// archived before parsing. Failed poems are excluded from pooled F1.
BenchmarkReport run_benchmark(ChatProvider& provider, const std::vector<const Poem*>& poems,
                              const std::vector<AnnotationSet>& gold,
                              const BenchmarkOptions& options);

// language,model,annotator,f1,failed_poems
void write_report_csv(std::ostream& out, const std::vector<BenchmarkReport>& reports);

}  // namespace rhyme
