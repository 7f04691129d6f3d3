#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rhyme {

// Ternary articulatory feature values: +1, -1, or 0 (unspecified).
using FeatureVector = std::vector<std::int8_t>;

// IPA symbol -> ternary feature row. Every row has the same width.
// CSV layout: header `symbol,f1,...,fF`, values in {+,-,0}.
class FeatureTable {
 public:
  static FeatureTable parse(std::string_view csv);
  static FeatureTable load(const std::filesystem::path& path);
  static const FeatureTable& shipped();  // data/ipa_features.csv

  std::size_t feature_count() const noexcept { return names_.size(); }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  std::optional<std::size_t> feature_index(std::string_view name) const;

  const FeatureVector* find(std::string_view symbol) const;
  std::vector<std::string> symbols() const;
  std::size_t longest_symbol() const noexcept { return longest_symbol_; }  // in code points

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, FeatureVector> rows_;
  std::size_t longest_symbol_ = 0;
};

struct Phoneme {
  std::string symbol;
  FeatureVector features;
  bool vowel = false;  // syllabic = +

  friend bool operator==(const Phoneme&, const Phoneme&) = default;
};

struct Transcription {
  std::vector<Phoneme> phonemes;
  std::set<std::size_t> stress_marks;  // indices of stressed nuclei
  std::string source_text;
};

// Suffix of a transcription starting at the rhyme nucleus.
struct RhymeSegment {
  std::vector<Phoneme> phonemes;

  std::string ipa() const;
};

// Parses IPA into phonemes by greedy longest match against the table.
// Primary stress (ˈ) marks the next vowel; modifiers (ː ̃ ʲ ʰ ʷ ̩ ̯ ̥ ̊ ̪)
// adjust the preceding phoneme's features.
Transcription parse_ipa(std::string_view ipa, const FeatureTable& table,
                        std::string source_text = {});

// Trims everything before the nucleus of the last stressed syllable; falls
// back to the last vowel when nothing is marked.
RhymeSegment extract_rhyme_segment(const Transcription& t);

double substitution_cost(const Phoneme& a, const Phoneme& b);

// Edit distance with substitution = fraction of differing features and
// unit insertion/deletion. normalize divides by the longer length.
double segment_distance(const RhymeSegment& a, const RhymeSegment& b, bool normalize = false);

struct Component {
  enum class Kind { vowel, consonant };
  Kind kind;
  std::size_t position;
  std::string symbols;

  friend bool operator==(const Component&, const Component&) = default;
};

// Alternating maximal vowel/consonant clusters from the nucleus onward.
std::vector<Component> decompose_components(const RhymeSegment& s);

}  // namespace rhyme
