#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "rhyme/corpus.hpp"
#include "rhyme/error.hpp"

using namespace rhyme;
namespace fs = std::filesystem;

namespace {

Corpus small_corpus() {
  std::vector<Poem> poems;
  for (int p = 0; p < 10; ++p) {
    poems.push_back(make_poem("p" + std::to_string(p), "en", std::nullopt,
                              {{"one line", "two line"}, {"red fish", "blue fish"}}));
  }
  return Corpus("en", std::move(poems));
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("rhyme-corpus-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Corpus, IndicesAssigned) {
  const auto c = small_corpus();
  EXPECT_EQ(c.line_count(), 40u);
  EXPECT_EQ(c.max_poem_lines(), 4u);
  const Poem* p = c.find("p3");
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->lines[2].stanza_index, 1u);
  EXPECT_EQ(p->lines[2].index_in_poem, 2u);
  EXPECT_EQ(p->lines[2].global_index, 14u);
  EXPECT_EQ(p->stanza_count(), 2u);
  EXPECT_EQ(c.find("nope"), nullptr);
}

TEST(Corpus, RejectsBadInput) {
  EXPECT_THROW(Corpus("xx", {make_poem("a", "xx", std::nullopt, {{"l"}})}), SchemaError);
  EXPECT_THROW(Corpus("en", {make_poem("a", "en", std::nullopt, {{"l"}}),
                             make_poem("a", "en", std::nullopt, {{"m"}})}),
               SchemaError);
  EXPECT_THROW(Corpus("en", {make_poem("a", "de", std::nullopt, {{"l"}})}), SchemaError);
  EXPECT_THROW(make_poem("a", "en", std::nullopt, {{"ok", "   "}}), SchemaError);
}

TEST(Corpus, JsonRoundTrip) {
  const auto c = small_corpus();
  const auto back = corpus_from_json(corpus_to_json(c));
  EXPECT_EQ(corpus_to_json(back), corpus_to_json(c));
  EXPECT_THROW(corpus_from_json(nlohmann::json::array()), SchemaError);
  EXPECT_THROW(corpus_from_json({{"language", "en"}}), SchemaError);
}

TEST(Corpus, SaveAndLoad) {
  const auto dir = temp_dir("save");
  save_corpus(small_corpus(), dir / "c.json");
  EXPECT_EQ(load_corpus(dir / "c.json").line_count(), 40u);
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_THROW(load_corpus(dir / "bad.json"), SchemaError);
}

TEST(Corpus, PlainTextDirectory) {
  const auto dir = temp_dir("text");
  std::ofstream(dir / "b.txt") << "Roses are red\nViolets are blue\n\n\nSugar is sweet\n";
  std::ofstream(dir / "a.txt") << "\nOnly line\n";
  EXPECT_THROW(load_corpus(dir), ValidationError);
  const auto c = load_corpus(dir, "en");
  ASSERT_EQ(c.poems().size(), 2u);
  EXPECT_EQ(c.poems()[0].id, "a");
  const Poem& b = c.poems()[1];
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.stanza_count(), 2u);
  EXPECT_EQ(b.lines[2].text, "Sugar is sweet");
}

TEST(Sample, WholePoemsUntilTarget) {
  const auto c = small_corpus();
  const auto s = sample_poems(c, 10, 42);
  EXPECT_EQ(s.poems.size(), 3u);
  EXPECT_GE(s.line_count(), 10u);
  std::set<const Poem*> unique(s.poems.begin(), s.poems.end());
  EXPECT_EQ(unique.size(), s.poems.size());
  const auto again = sample_poems(c, 10, 42);
  EXPECT_EQ(again.poems, s.poems);
  EXPECT_EQ(sample_poems(c, 40, 1).poems.size(), 10u);
  EXPECT_THROW(sample_poems(c, 41, 1), InsufficientDataError);
  EXPECT_THROW(sample_poems(c, 0, 1), ValidationError);
  EXPECT_EQ(whole_corpus(c).line_count(), 40u);
}

TEST(Sample, LineFinalWord) {
  const auto p = make_poem("x", "en", std::nullopt, {{"Who said, 'It is just as I feared!", "..."}});
  EXPECT_EQ(line_final_word(p.lines[0]), "feared");
  EXPECT_FALSE(line_final_word(p.lines[1]).has_value());
}
