#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "rhyme/evaluation.hpp"
#include "rhyme/server.hpp"

#include <unistd.h>

using namespace rhyme;
namespace fs = std::filesystem;

namespace {

Corpus octave_corpus() {
  return Corpus("en", {make_poem("octave", "en", std::string("Octave"),
                                 {{"l0", "l1", "l2", "l3"}, {"l4", "l5", "l6", "l7"}}),
                       make_poem("two", "en", std::nullopt, {{"a", "b"}})});
}

class Live : public ::testing::Test {
 protected:
  void start(std::optional<std::string> token = std::nullopt) {
    dir_ = fs::temp_directory_path() / ("rhyme-server-" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    server_ = std::make_unique<AnnotationServer>(corpus_, ServerOptions{dir_, std::nullopt, token});
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    // wait until the listener answers
    for (int i = 0; i < 100 && !client_->Get("/api/poems"); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  void TearDown() override {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
    fs::remove_all(dir_);
  }

  httplib::Result put(const std::string& path, const nlohmann::json& body,
                      std::optional<std::string> if_match) {
    httplib::Headers h;
    if (if_match) h.emplace("If-Match", *if_match);
    return client_->Put(path, h, body.dump(), "application/json");
  }

  Corpus corpus_ = octave_corpus();
  fs::path dir_;
  std::unique_ptr<AnnotationServer> server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

nlohmann::json octave_body(const std::string& who = "ann1") {
  return {{"annotator", who}, {"poem_id", "octave"}, {"chains", {{0, 3, 4, 7}, {1, 2, 5, 6}}}};
}

}  // namespace

TEST(Version, Fnv1a) {
  const auto f = fs::temp_directory_path() / "rhyme-fnv.txt";
  { std::ofstream(f) << "a"; }
  EXPECT_EQ(resource_version(f), "af63dc4c8601ec8c");  // FNV-1a 64 of "a"
  EXPECT_EQ(resource_version(f.string() + ".missing"), "0");
}

TEST(Version, AnnotatorIds) {
  EXPECT_TRUE(is_valid_annotator_id("ann_1-x"));
  EXPECT_FALSE(is_valid_annotator_id(""));
  EXPECT_FALSE(is_valid_annotator_id("../etc"));
  EXPECT_FALSE(is_valid_annotator_id(std::string(65, 'a')));
}

TEST_F(Live, ReadsPoems) {
  start();
  auto res = client_->Get("/api/poems");
  ASSERT_TRUE(res);
  const auto list = nlohmann::json::parse(res->body);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0]["line_count"], 8);
  res = client_->Get("/api/poems/octave");
  const auto poem = nlohmann::json::parse(res->body);
  EXPECT_EQ(poem["stanzas"].size(), 2u);
  EXPECT_EQ(poem["stanzas"][1][3], "l7");
  EXPECT_EQ(client_->Get("/api/poems/none")->status, 404);
}

TEST_F(Live, OptimisticConcurrencyRoundTrip) {
  start();
  EXPECT_EQ(client_->Get("/api/annotations/ann1/octave")->status, 404);
  EXPECT_EQ(put("/api/annotations/ann1/octave", octave_body(), std::nullopt)->status, 428);

  auto res = put("/api/annotations/ann1/octave", octave_body(), "\"0\"");
  ASSERT_EQ(res->status, 204);
  const std::string etag = res->get_header_value("ETag");

  res = client_->Get("/api/annotations/ann1/octave");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("ETag"), etag);
  const auto stored = annotation_from_json(nlohmann::json::parse(res->body));
  EXPECT_EQ(stored.chains, (Chains{{0, 3, 4, 7}, {1, 2, 5, 6}}));

  // stale writer loses
  res = put("/api/annotations/ann1/octave", octave_body(), "\"0\"");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(nlohmann::json::parse(res->body)["current_version"], etag.substr(1, etag.size() - 2));

  auto next = octave_body();
  next["chains"] = {{0, 1}};
  EXPECT_EQ(put("/api/annotations/ann1/octave", next, etag)->status, 204);

  // file on disk feeds straight into iaa
  const auto a = load_annotation_dir(dir_ / "ann1");
  EXPECT_EQ(a.poems.at("octave").chains, (Chains{{0, 1}}));

  const auto progress = nlohmann::json::parse(client_->Get("/api/progress/ann1")->body);
  EXPECT_EQ(progress["annotated"], 1);
  EXPECT_EQ(progress["total"], 2);
}

TEST_F(Live, SavedOctaveAgreesWithItself) {
  start();
  ASSERT_EQ(put("/api/annotations/ann1/octave", octave_body("ann1"), "0")->status, 204);
  ASSERT_EQ(put("/api/annotations/ann2/octave", octave_body("ann2"), "0")->status, 204);
  const auto r = iaa_report("en", load_annotation_dir(dir_ / "ann1"),
                            load_annotation_dir(dir_ / "ann2"));
  EXPECT_EQ(r.micro_f1, 1.0);
}

TEST_F(Live, RejectsBadWrites) {
  start();
  auto res = client_->Put("/api/annotations/ann1/octave", {{"If-Match", "0"}}, "{oops",
                          "application/json");
  EXPECT_EQ(res->status, 400);
  auto body = octave_body();
  body["chains"] = {{0, 8}};
  EXPECT_EQ(put("/api/annotations/ann1/octave", body, "0")->status, 422);
  EXPECT_EQ(put("/api/annotations/ann2/octave", octave_body("ann1"), "0")->status, 422);
  EXPECT_EQ(put("/api/annotations/bad.id/octave", octave_body(), "0")->status, 400);
  EXPECT_EQ(put("/api/annotations/ann1/nope", octave_body(), "0")->status, 404);
  EXPECT_FALSE(fs::exists(dir_ / "ann1" / "octave.json"));
}

TEST_F(Live, BearerToken) {
  start("tok");
  EXPECT_EQ(client_->Get("/api/poems")->status, 401);
  client_->set_bearer_token_auth("tok");
  EXPECT_EQ(client_->Get("/api/poems")->status, 200);
}

TEST_F(Live, ConcurrentWritersOneWins) {
  start();
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> writers;
  for (int i = 0; i < 8; ++i) {
    writers.emplace_back([&] {
      httplib::Client c("127.0.0.1", port_);
      const auto r = c.Put("/api/annotations/ann1/octave", {{"If-Match", "0"}},
                           octave_body().dump(), "application/json");
      if (r && r->status == 204) ++ok;
      if (r && r->status == 409) ++conflict;
    });
  }
  for (auto& w : writers) w.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflict.load(), 7);
}
