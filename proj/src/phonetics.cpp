#include "rhyme/phonetics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rhyme/error.hpp"
#include "rhyme/text.hpp"

namespace rhyme {
namespace {

constexpr char32_t kPrimaryStress = U'ˈ';
constexpr char32_t kSecondaryStress = U'ˌ';

bool is_tie_bar(char32_t cp) { return cp == 0x0361 || cp == 0x035C; }

bool is_ignorable(char32_t cp) {
  switch (cp) {
    case U'_':
    case U'.':
    case U',':
    case U'|':
    case U'‖':
    case U'-':
    case U'‿':
    case U'ˑ':
    case 0x200D:  // zero-width joiner between phoneme letters
    case kSecondaryStress:
      return true;
    default:
      return text::is_space(cp);
  }
}

struct FeatureEdit {
  std::string_view feature;
  std::int8_t value;
};

// Diacritics and modifier letters applied on top of a base row.
std::vector<FeatureEdit> modifier_edits(char32_t cp, bool& known) {
  known = true;
  switch (cp) {
    case U'ː':
      return {{"long", 1}};
    case 0x0303:  // nasalized
      return {{"nas", 1}};
    case U'ʲ':
      return {{"hi", 1}, {"back", -1}};
    case U'ʰ':
      return {{"sg", 1}};
    case U'ʷ':
      return {{"round", 1}, {"lab", 1}};
    case 0x0329:  // syllabic
    case 0x030D:
      return {{"syl", 1}};
    case 0x032F:  // non-syllabic
      return {{"syl", -1}};
    case 0x0325:  // voiceless
    case 0x030A:
      return {{"voi", -1}};
    case 0x032A:  // dental
      return {{"ant", 1}, {"distr", 1}};
    default:
      known = false;
      return {};
  }
}

bool is_modifier_candidate(char32_t cp) {
  bool known = false;
  modifier_edits(cp, known);
  if (known) return true;
  // Unknown combining marks still attach to the phoneme; they fail coverage.
  return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x02B0 && cp <= 0x02FF && cp != kPrimaryStress &&
                                            cp != kSecondaryStress && cp != U'ˑ');
}

std::int8_t parse_value(std::string_view v, std::size_t line_no) {
  if (v == "+") return 1;
  if (v == "-") return -1;
  if (v == "0") return 0;
  throw SchemaError("feature table line " + std::to_string(line_no) + ": bad value '" +
                    std::string(v) + "'");
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

FeatureTable FeatureTable::parse(std::string_view csv) {
  FeatureTable table;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t end = csv.find('\n', start);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (table.names_.empty()) {
      if (cells.size() < 2 || cells[0] != "symbol") {
        throw SchemaError("feature table header must start with 'symbol'");
      }
      for (std::size_t i = 1; i < cells.size(); ++i) table.names_.emplace_back(cells[i]);
      if (!table.feature_index("syl")) {
        throw SchemaError("feature table needs a 'syl' column");
      }
      continue;
    }
    if (cells.size() != table.names_.size() + 1) {
      throw SchemaError("feature table line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size() - 1) + " values, expected " +
                        std::to_string(table.names_.size()));
    }
    FeatureVector row;
    row.reserve(table.names_.size());
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(parse_value(cells[i], line_no));
    std::string symbol(cells[0]);
    table.longest_symbol_ = std::max(table.longest_symbol_, text::decode_utf8(symbol).size());
    if (!table.rows_.emplace(std::move(symbol), std::move(row)).second) {
      throw SchemaError("feature table repeats symbol '" + std::string(cells[0]) + "'");
    }
  }
  if (table.names_.empty()) throw SchemaError("feature table is empty");
  return table;
}

FeatureTable FeatureTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open feature table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const FeatureTable& FeatureTable::shipped() {
  static const FeatureTable table = load(RHYME_DEFAULT_FEATURES);
  return table;
}

std::optional<std::size_t> FeatureTable::feature_index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const FeatureVector* FeatureTable::find(std::string_view symbol) const {
  auto it = rows_.find(std::string(symbol));
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<std::string> FeatureTable::symbols() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& [symbol, row] : rows_) out.push_back(symbol);
  std::sort(out.begin(), out.end());
  return out;
}

std::string RhymeSegment::ipa() const {
  std::string out;
  for (const auto& p : phonemes) out += p.symbol;
  return out;
}

Transcription parse_ipa(std::string_view ipa, const FeatureTable& table, std::string source_text) {
  const std::u32string cps = text::decode_utf8(ipa);
  const std::size_t syl = *table.feature_index("syl");
  Transcription out;
  out.source_text = std::move(source_text);
  bool stress_pending = false;

  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t cp = cps[i];
    if (cp == kPrimaryStress || cp == U'\'') {
      stress_pending = true;
      ++i;
      continue;
    }
    if (is_ignorable(cp)) {
      ++i;
      continue;
    }
    // Greedy longest match.
    std::size_t matched = 0;
    const FeatureVector* row = nullptr;
    const std::size_t max_len = std::min(table.longest_symbol(), cps.size() - i);
    for (std::size_t len = max_len; len >= 1; --len) {
      row = table.find(text::encode_utf8(std::u32string_view(cps).substr(i, len)));
      if (row) {
        matched = len;
        break;
      }
    }
    if (!row) {
      std::size_t end = i + 1;
      while (end < cps.size() && is_modifier_candidate(cps[end])) ++end;
      throw CoverageError(text::encode_utf8(std::u32string_view(cps).substr(i, end - i)));
    }
    Phoneme ph;
    ph.features = *row;
    std::size_t end = i + matched;
    if (end < cps.size() && is_tie_bar(cps[end])) {
      const std::size_t stop = std::min(cps.size(), end + 2);
      throw CoverageError(text::encode_utf8(std::u32string_view(cps).substr(i, stop - i)));
    }
    while (end < cps.size() && is_modifier_candidate(cps[end])) {
      bool known = false;
      const auto edits = modifier_edits(cps[end], known);
      if (!known) {
        throw CoverageError(text::encode_utf8(std::u32string_view(cps).substr(i, end + 1 - i)));
      }
      for (const auto& edit : edits) {
        if (auto idx = table.feature_index(edit.feature)) ph.features[*idx] = edit.value;
      }
      ++end;
    }
    ph.symbol = text::encode_utf8(std::u32string_view(cps).substr(i, end - i));
    ph.vowel = ph.features[syl] == 1;
    if (ph.vowel && stress_pending) {
      out.stress_marks.insert(out.phonemes.size());
      stress_pending = false;
    }
    out.phonemes.push_back(std::move(ph));
    i = end;
  }
  return out;
}

RhymeSegment extract_rhyme_segment(const Transcription& t) {
  std::optional<std::size_t> start;
  if (!t.stress_marks.empty()) {
    start = *t.stress_marks.rbegin();
  } else {
    for (std::size_t i = t.phonemes.size(); i-- > 0;) {
      if (t.phonemes[i].vowel) {
        start = i;
        break;
      }
    }
  }
  if (!start) throw NoNucleusError("no vowel in transcription of '" + t.source_text + "'");
  RhymeSegment seg;
  seg.phonemes.assign(t.phonemes.begin() + static_cast<std::ptrdiff_t>(*start), t.phonemes.end());
  return seg;
}

double substitution_cost(const Phoneme& a, const Phoneme& b) {
  if (a.features.empty()) throw CoverageError(a.symbol);
  if (b.features.empty()) throw CoverageError(b.symbol);
  if (a.features.size() != b.features.size()) {
    throw CoverageError(a.features.size() < b.features.size() ? a.symbol : b.symbol);
  }
  std::size_t diff = 0;
  for (std::size_t k = 0; k < a.features.size(); ++k) diff += a.features[k] != b.features[k];
  return static_cast<double>(diff) / static_cast<double>(a.features.size());
}

double segment_distance(const RhymeSegment& a, const RhymeSegment& b, bool normalize) {
  const auto& x = a.phonemes;
  const auto& y = b.phonemes;
  for (const auto& p : x)
    if (p.features.empty()) throw CoverageError(p.symbol);
  for (const auto& p : y)
    if (p.features.empty()) throw CoverageError(p.symbol);

  std::vector<double> prev(y.size() + 1);
  std::vector<double> cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = static_cast<double>(j);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = static_cast<double>(i);
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j] + 1.0, cur[j - 1] + 1.0,
                         prev[j - 1] + substitution_cost(x[i - 1], y[j - 1])});
    }
    std::swap(prev, cur);
  }
  const double d = prev[y.size()];
  if (!normalize) return d;
  const std::size_t longest = std::max(x.size(), y.size());
  return longest == 0 ? 0.0 : d / static_cast<double>(longest);
}

std::vector<Component> decompose_components(const RhymeSegment& s) {
  std::vector<Component> out;
  for (const auto& p : s.phonemes) {
    const auto kind = p.vowel ? Component::Kind::vowel : Component::Kind::consonant;
    if (out.empty() || out.back().kind != kind) {
      out.push_back(Component{kind, out.size(), {}});
    }
    out.back().symbols += p.symbol;
  }
  return out;
}

}  // namespace rhyme
