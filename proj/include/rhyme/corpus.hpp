#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace rhyme {

struct Line {
  std::string text;
  std::string poem_id;
  std::size_t index_in_poem = 0;
  std::size_t stanza_index = 0;
  std::size_t global_index = 0;  // position in the owning corpus
};

struct Poem {
  std::string id;
  std::string language;
  std::optional<std::string> title;
  std::vector<Line> lines;

  std::size_t size() const noexcept { return lines.size(); }
  std::size_t stanza_count() const noexcept {
    return lines.empty() ? 0 : lines.back().stanza_index + 1;
  }
};

// Builds a poem from stanza arrays; blank lines inside a stanza are rejected.
Poem make_poem(std::string id, std::string language, std::optional<std::string> title,
               const std::vector<std::vector<std::string>>& stanzas);

// Immutable, validated poem collection. All poems share the corpus language
// and line indices are assigned on construction.
class Corpus {
 public:
  Corpus(std::string language, std::vector<Poem> poems);

  const std::string& language() const noexcept { return language_; }
  const std::vector<Poem>& poems() const noexcept { return poems_; }
  std::size_t line_count() const noexcept { return line_count_; }
  std::size_t max_poem_lines() const noexcept { return max_poem_lines_; }
  const Poem* find(std::string_view id) const;

 private:
  std::string language_;
  std::vector<Poem> poems_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t line_count_ = 0;
  std::size_t max_poem_lines_ = 0;
};

bool is_iso639_1(std::string_view code);

Corpus corpus_from_json(const nlohmann::json& doc);
nlohmann::json corpus_to_json(const Corpus& corpus);

// Reads either the JSON corpus format or a directory of plain-text poems
// (one poem per file, file stem = poem id, blank lines separate stanzas).
Corpus load_corpus(const std::filesystem::path& path,
                   std::optional<std::string> language = std::nullopt);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

Poem parse_plain_text_poem(std::string id, std::string language, std::string_view text);
Corpus load_text_directory(const std::filesystem::path& dir, std::string language);

// Whole poems drawn without replacement until the line target is met.
// Poems are borrowed from the corpus, which must outlive the sample.
struct Sample {
  std::vector<const Poem*> poems;
  std::uint64_t seed = 0;
  std::size_t target_lines = 0;

  std::size_t line_count() const noexcept;
};

Sample sample_poems(const Corpus& corpus, std::size_t target_lines, std::uint64_t seed);

// Sample of every poem in corpus order.
Sample whole_corpus(const Corpus& corpus);

std::optional<std::string> line_final_word(const Line& line);

}  // namespace rhyme
