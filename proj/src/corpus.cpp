#include "rhyme/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rhyme/error.hpp"
#include "rhyme/text.hpp"

namespace rhyme {
namespace {

constexpr std::string_view kIso6391[] = {
    "aa", "ab", "ae", "af", "ak", "am", "an", "ar", "as", "av", "ay", "az", "ba", "be", "bg",
    "bh", "bi", "bm", "bn", "bo", "br", "bs", "ca", "ce", "ch", "co", "cr", "cs", "cu", "cv",
    "cy", "da", "de", "dv", "dz", "ee", "el", "en", "eo", "es", "et", "eu", "fa", "ff", "fi",
    "fj", "fo", "fr", "fy", "ga", "gd", "gl", "gn", "gu", "gv", "ha", "he", "hi", "ho", "hr",
    "ht", "hu", "hy", "hz", "ia", "id", "ie", "ig", "ii", "ik", "io", "is", "it", "iu", "ja",
    "jv", "ka", "kg", "ki", "kj", "kk", "kl", "km", "kn", "ko", "kr", "ks", "ku", "kv", "kw",
    "ky", "la", "lb", "lg", "li", "ln", "lo", "lt", "lu", "lv", "mg", "mh", "mi", "mk", "ml",
    "mn", "mr", "ms", "mt", "my", "na", "nb", "nd", "ne", "ng", "nl", "nn", "no", "nr", "nv",
    "ny", "oc", "oj", "om", "or", "os", "pa", "pi", "pl", "ps", "pt", "qu", "rm", "rn", "ro",
    "ru", "rw", "sa", "sc", "sd", "se", "sg", "si", "sk", "sl", "sm", "sn", "so", "sq", "sr",
    "ss", "st", "su", "sv", "sw", "ta", "te", "tg", "th", "ti", "tk", "tl", "tn", "to", "tr",
    "ts", "tt", "tw", "ty", "ug", "uk", "ur", "uz", "ve", "vi", "vo", "wa", "wo", "xh", "yi",
    "yo", "za", "zh", "zu"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

bool is_iso639_1(std::string_view code) {
  return std::binary_search(std::begin(kIso6391), std::end(kIso6391), code);
}

Poem make_poem(std::string id, std::string language, std::optional<std::string> title,
               const std::vector<std::vector<std::string>>& stanzas) {
  Poem poem{std::move(id), std::move(language), std::move(title), {}};
  std::size_t stanza = 0;
  for (const auto& lines : stanzas) {
    if (lines.empty()) continue;
    for (const auto& raw : lines) {
      std::string t = text::trim(raw);
      if (t.empty()) {
        throw SchemaError("poem '" + poem.id + "': blank line inside stanza " +
                          std::to_string(stanza));
      }
      Line line;
      line.text = std::move(t);
      line.poem_id = poem.id;
      line.index_in_poem = poem.lines.size();
      line.stanza_index = stanza;
      poem.lines.push_back(std::move(line));
    }
    ++stanza;
  }
  return poem;
}

Corpus::Corpus(std::string language, std::vector<Poem> poems)
    : language_(std::move(language)), poems_(std::move(poems)) {
  if (!is_iso639_1(language_)) {
    throw SchemaError("unknown language code '" + language_ + "'");
  }
  for (std::size_t p = 0; p < poems_.size(); ++p) {
    Poem& poem = poems_[p];
    if (poem.id.empty()) {
      throw SchemaError("poem at position " + std::to_string(p) + " has no id");
    }
    if (!index_.emplace(poem.id, p).second) {
      throw SchemaError("duplicate poem id '" + poem.id + "'");
    }
    if (poem.language.empty()) poem.language = language_;
    if (poem.language != language_) {
      throw SchemaError("poem '" + poem.id + "' has language '" + poem.language +
                        "' but corpus language is '" + language_ + "'");
    }
    if (poem.lines.empty()) throw SchemaError("poem '" + poem.id + "' has no lines");
    std::size_t prev_stanza = 0;
    for (std::size_t i = 0; i < poem.lines.size(); ++i) {
      Line& line = poem.lines[i];
      if (line.index_in_poem != i || line.poem_id != poem.id) {
        throw SchemaError("poem '" + poem.id + "': line indices are not dense");
      }
      if (line.stanza_index < prev_stanza) {
        throw SchemaError("poem '" + poem.id + "': stanza indices decrease");
      }
      prev_stanza = line.stanza_index;
      line.global_index = line_count_++;
    }
    max_poem_lines_ = std::max(max_poem_lines_, poem.lines.size());
  }
  if (line_count_ == 0) throw SchemaError("corpus has no lines");
}

const Poem* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &poems_[it->second];
}

Corpus corpus_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw SchemaError("corpus must be a JSON object");
    if (!doc.contains("language") || !doc["language"].is_string()) {
      throw SchemaError("corpus is missing \"language\"");
    }
    if (!doc.contains("poems") || !doc["poems"].is_array()) {
      throw SchemaError("corpus is missing \"poems\" array");
    }
    const std::string language = doc["language"].get<std::string>();
    std::vector<Poem> poems;
    for (std::size_t p = 0; p < doc["poems"].size(); ++p) {
      const auto& item = doc["poems"][p];
      if (!item.contains("id") || !item["id"].is_string()) {
        throw SchemaError("poem at position " + std::to_string(p) + " has no id");
      }
      std::optional<std::string> title;
      if (item.contains("title") && item["title"].is_string()) {
        title = item["title"].get<std::string>();
      }
      if (!item.contains("stanzas") || !item["stanzas"].is_array()) {
        throw SchemaError("poem '" + item["id"].get<std::string>() + "' has no stanzas");
      }
      auto stanzas = item["stanzas"].get<std::vector<std::vector<std::string>>>();
      std::string lang = item.value("language", language);
      poems.push_back(make_poem(item["id"].get<std::string>(), std::move(lang),
                                std::move(title), stanzas));
    }
    return Corpus(language, std::move(poems));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("corpus schema: ") + e.what());
  }
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
  nlohmann::json poems = nlohmann::json::array();
  for (const auto& poem : corpus.poems()) {
    nlohmann::json stanzas = nlohmann::json::array();
    for (const auto& line : poem.lines) {
      while (stanzas.size() <= line.stanza_index) stanzas.push_back(nlohmann::json::array());
      stanzas[line.stanza_index].push_back(line.text);
    }
    nlohmann::json stanzas_dense = nlohmann::json::array();
    for (auto& s : stanzas) {
      if (!s.empty()) stanzas_dense.push_back(std::move(s));
    }
    nlohmann::json item;
    item["id"] = poem.id;
    item["title"] = poem.title ? nlohmann::json(*poem.title) : nlohmann::json(nullptr);
    item["stanzas"] = std::move(stanzas_dense);
    poems.push_back(std::move(item));
  }
  return {{"language", corpus.language()}, {"poems", std::move(poems)}};
}

Poem parse_plain_text_poem(std::string id, std::string language, std::string_view body) {
  std::vector<std::vector<std::string>> stanzas(1);
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    std::string line = text::trim(body.substr(start, end - start));
    if (line.empty()) {
      if (!stanzas.back().empty()) stanzas.emplace_back();
    } else {
      stanzas.back().push_back(std::move(line));
    }
    start = end + 1;
  }
  return make_poem(std::move(id), std::move(language), std::nullopt, stanzas);
}

Corpus load_text_directory(const std::filesystem::path& dir, std::string language) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Poem> poems;
  for (const auto& file : files) {
    poems.push_back(parse_plain_text_poem(file.stem().string(), language, read_file(file)));
  }
  return Corpus(std::move(language), std::move(poems));
}

Corpus load_corpus(const std::filesystem::path& path, std::optional<std::string> language) {
  if (std::filesystem::is_directory(path)) {
    if (!language) throw ValidationError("a language code is required for text directories");
    return load_text_directory(path, *language);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return corpus_from_json(doc);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << corpus_to_json(corpus).dump(1) << '\n';
}

std::size_t Sample::line_count() const noexcept {
  std::size_t n = 0;
  for (const Poem* p : poems) n += p->size();
  return n;
}

Sample sample_poems(const Corpus& corpus, std::size_t target_lines, std::uint64_t seed) {
  if (target_lines == 0) throw ValidationError("target_lines must be at least 1");
  if (target_lines > corpus.line_count()) {
    throw InsufficientDataError("requested " + std::to_string(target_lines) +
                                " lines but the corpus has " +
                                std::to_string(corpus.line_count()));
  }
  std::vector<std::size_t> order(corpus.poems().size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  Sample sample;
  sample.seed = seed;
  sample.target_lines = target_lines;
  std::size_t total = 0;
  // Incremental Fisher-Yates: only the drawn prefix gets shuffled.
  for (std::size_t i = 0; i < order.size() && total < target_lines; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
    const Poem& poem = corpus.poems()[order[i]];
    sample.poems.push_back(&poem);
    total += poem.size();
  }
  return sample;
}

Sample whole_corpus(const Corpus& corpus) {
  Sample sample;
  sample.target_lines = corpus.line_count();
  for (const auto& poem : corpus.poems()) sample.poems.push_back(&poem);
  return sample;
}

std::optional<std::string> line_final_word(const Line& line) {
  return text::final_word(line.text);
}

}  // namespace rhyme
