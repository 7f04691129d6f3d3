#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rhyme/error.hpp"
#include "rhyme/llm.hpp"

using namespace rhyme;
namespace fs = std::filesystem;

namespace {

Poem limerick() {
  return make_poem("limerick", "en", std::nullopt,
                   {{"There was an Old Man with a beard,", "Who said, 'It is just as I feared!",
                     "Two Owls and a Hen,", "Four Larks and a Wren,",
                     "Have all built their nests in my beard!'"}});
}

nlohmann::json golden() {
  std::ifstream in(RHYME_GOLDEN_DIR "/limerick_prompt.json");
  return nlohmann::json::parse(in);
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("rhyme-llm-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

AnnotationSet limerick_gold() {
  return {"ann1", {{"limerick", Annotation{"ann1", "limerick", {{0, 1, 4}, {2, 3}}}}}};
}

constexpr std::string_view kLimerickAnswer =
    R"({"rhymes": [["beard", "feared", "beard"], ["hen", "wren"]]})";

class ScriptedProvider final : public ChatProvider {
 public:
  explicit ScriptedProvider(std::vector<std::function<std::string()>> steps)
      : steps_(std::move(steps)) {}
  std::string complete(const std::vector<ChatMessage>&, const std::string&) override {
    return steps_.at(calls_++)();
  }
  std::string model() const override { return "scripted"; }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<std::function<std::string()>> steps_;
  std::size_t calls_ = 0;
};

}  // namespace

TEST(Prompt, MatchesGolden) {
  const auto g = golden();
  const auto messages = build_prompt(limerick()).messages();
  ASSERT_EQ(messages.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(messages[i].role, g["messages"][i]["role"]);
    EXPECT_EQ(messages[i].content, g["messages"][i]["content"]);
  }
  EXPECT_THROW(build_prompt(Poem{"e", "en", std::nullopt, {}}), ValidationError);
}

TEST(Prompt, PoemTextSeparatesStanzas) {
  const auto p = make_poem("p", "en", std::nullopt, {{"a", "b"}, {"c"}});
  EXPECT_EQ(poem_text(p), "a\nb\n\nc");
}

TEST(Prompt, RequestBody) {
  const auto body = HttpChatProvider::request_body("m1", {{"user", "hi"}});
  EXPECT_EQ(body.dump(), R"({"messages":[{"content":"hi","role":"user"}],"model":"m1","temperature":0})");
}

TEST(Parse, ToleratesProseAndFences) {
  const auto g = parse_response(std::string("Sure!\n```json\n") + std::string(kLimerickAnswer) +
                                "\n```\nHope that helps {not json}");
  ASSERT_EQ(g.groups.size(), 2u);
  EXPECT_EQ(g.groups[1], (std::vector<std::string>{"hen", "wren"}));
}

TEST(Parse, SkipsObjectsWithoutRhymesAndBracesInStrings) {
  const auto g = parse_response(R"({"note": "a } brace"} then {"rhymes": [["a}", "b"], ["solo"]]})");
  ASSERT_EQ(g.groups.size(), 1u);
  EXPECT_EQ(g.groups[0][0], "a}");
  EXPECT_EQ(g.dropped_singletons, 1u);
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_response("no json here"), ResponseParseError);
  EXPECT_THROW(parse_response(R"({"groups": []})"), ResponseShapeError);
  EXPECT_THROW(parse_response(R"({"rhymes": "beard"})"), ResponseShapeError);
  try {
    parse_response("{broken");
    FAIL();
  } catch (const ResponseParseError& e) {
    EXPECT_EQ(e.raw(), "{broken");
  }
}

TEST(Map, LimerickChains) {
  const auto m = map_groups_to_lines(parse_response(kLimerickAnswer), limerick());
  EXPECT_EQ(nlohmann::json(m.chains).dump(), "[[0,1,4],[2,3]]");
  EXPECT_EQ(m.unmatched_words, 0u);
}

TEST(Map, UnmatchedAndMerged) {
  const auto p = make_poem("p", "en", std::nullopt, {{"the day", "the way", "a stay", "moon"}});
  RhymeGroups g{{{"day", "way"}, {"Way", "STAY!", "spoon"}, {"moon", "noon"}}, 0};
  const auto m = map_groups_to_lines(g, p);
  // lines are consumed per group, so "Way" matches again and the two groups
  // merge through line 1; "spoon" and "noon" are absent, "moon" alone is dropped
  EXPECT_EQ(m.chains, (Chains{{0, 1, 2}}));
  EXPECT_EQ(m.unmatched_words, 2u);
  EXPECT_EQ(normalize_response_word("in my Beard!'"), "beard");
  EXPECT_FALSE(normalize_response_word("...").has_value());
}

TEST(Benchmark, RetriesRetryableErrors) {
  ScriptedProvider p({[]() -> std::string { throw ProviderError("HTTP 429", true); },
                      []() -> std::string { throw ProviderError("HTTP 503", true); },
                      [] { return std::string(kLimerickAnswer); }});
  const auto poem = limerick();
  BenchmarkOptions opts;
  opts.backoff_base = std::chrono::milliseconds(1);
  const auto r = run_benchmark(p, {&poem}, {limerick_gold()}, opts);
  EXPECT_EQ(r.poems[0].attempts, 3u);
  EXPECT_FALSE(r.poems[0].failed);
  EXPECT_EQ(r.pooled[0], 1.0);
}

TEST(Benchmark, FatalErrorsAndBadResponsesFail) {
  const auto poem = limerick();
  BenchmarkOptions opts;
  opts.backoff_base = std::chrono::milliseconds(1);
  ScriptedProvider fatal({[]() -> std::string { throw ProviderError("HTTP 401", false); }});
  auto r = run_benchmark(fatal, {&poem}, {limerick_gold()}, opts);
  EXPECT_EQ(fatal.calls(), 1u);
  EXPECT_TRUE(r.poems[0].failed);
  EXPECT_FALSE(r.pooled[0].has_value());
  std::ostringstream csv;
  write_report_csv(csv, {r});
  EXPECT_EQ(csv.str(), "language,model,annotator,f1,failed_poems\n,scripted,ann1,NA,1\n");

  ScriptedProvider prose({[] { return std::string("I cannot do that."); }});
  r = run_benchmark(prose, {&poem}, {limerick_gold()}, opts);
  EXPECT_TRUE(r.poems[0].failed);
  EXPECT_EQ(r.failed, 1u);
}

TEST(Benchmark, EmptyObjectsFailEveryPoem) {
  const auto poem = limerick();
  const auto other = make_poem("other", "en", std::nullopt, {{"a", "b"}});
  ScriptedProvider p({[] { return std::string("{}"); }, [] { return std::string("{}"); }});
  BenchmarkOptions opts;
  opts.concurrency = 1;
  const auto r = run_benchmark(p, {&poem, &other}, {limerick_gold()}, opts);
  EXPECT_EQ(r.failed, 2u);
  EXPECT_FALSE(r.pooled[0].has_value());
}

TEST(Benchmark, ArchiveThenReplay) {
  const auto dir = temp_dir("archive");
  const auto poem = limerick();
  ScriptedProvider p({[] { return std::string(kLimerickAnswer); }});
  BenchmarkOptions opts;
  opts.language = "en";
  opts.archive_dir = dir;
  run_benchmark(p, {&poem}, {limerick_gold()}, opts);
  const auto file = dir / "000000-limerick.json";
  ASSERT_TRUE(fs::exists(file));
  std::ifstream in(file);
  const auto entry = nlohmann::json::parse(in);
  EXPECT_EQ(entry["raw"], kLimerickAnswer);
  EXPECT_EQ(entry["model"], "scripted");
  EXPECT_EQ(entry["temperature"], 0);
  EXPECT_TRUE(entry.contains("timestamp"));

  ReplayProvider replay(dir);
  EXPECT_EQ(replay.model(), "scripted");
  opts.archive_dir.reset();
  const auto r = run_benchmark(replay, {&poem}, {limerick_gold()}, opts);
  EXPECT_EQ(r.pooled[0], 1.0);
  EXPECT_THROW(replay.complete({}, "other"), ProviderError);
  EXPECT_THROW(ReplayProvider(dir / "missing"), ValidationError);
}

TEST(Config, ProviderJson) {
  const auto c = provider_config_from_json(
      {{"endpoint_url", "http://localhost:1/v1/chat/completions"}, {"model_name", "m"}});
  EXPECT_EQ(c.max_retries, 3u);
  EXPECT_THROW(provider_config_from_json({{"endpoint_url", "ftp://x"}, {"model_name", "m"}}),
               SchemaError);
  EXPECT_THROW(provider_config_from_json({{"model_name", "m"}}), SchemaError);
}

TEST(RateLimit, SpacesRequests) {
  RateLimiter limiter(1200);  // 50 ms apart
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire();
  EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(145));
}

// Live round trip against a local stand-in for a chat completions endpoint.
TEST(Http, TalksToChatEndpoint) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth, seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 429;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    nlohmann::json reply = {{"choices", {{{"message", {{"content", kLimerickAnswer}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("RHYME_TEST_TOKEN", "sekret", 1);
  HttpChatProvider provider(provider_config_from_json(
      {{"endpoint_url", "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"},
       {"model_name", "test-model"},
       {"auth_token_env", "RHYME_TEST_TOKEN"}}));
  const auto poem = limerick();
  BenchmarkOptions opts;
  opts.backoff_base = std::chrono::milliseconds(1);
  const auto r = run_benchmark(provider, {&poem}, {limerick_gold()}, opts);
  server.stop();
  t.join();

  EXPECT_EQ(hits.load(), 2);
  EXPECT_EQ(seen_auth, "Bearer sekret");
  const auto body = nlohmann::json::parse(seen_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["temperature"], 0);
  EXPECT_EQ(body["messages"].size(), 3u);
  EXPECT_EQ(r.pooled[0], 1.0);

  ::unsetenv("RHYME_TEST_TOKEN");
  EXPECT_THROW(provider.complete({}, "x"), ProviderError);
}
