#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>

#include "rhyme/error.hpp"
#include "rhyme/phonetics.hpp"
#include "synthetic.hpp"

using namespace rhyme;

namespace {

const FeatureTable& table() { return FeatureTable::shipped(); }

RhymeSegment seg(std::string_view ipa) {
  return RhymeSegment{parse_ipa(ipa, table()).phonemes};
}

// Memoized recursion over suffixes; independent of the library's DP table.
double reference_distance(const RhymeSegment& a, const RhymeSegment& b) {
  std::map<std::pair<std::size_t, std::size_t>, double> memo;
  std::function<double(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == a.phonemes.size()) return static_cast<double>(b.phonemes.size() - j);
    if (j == b.phonemes.size()) return static_cast<double>(a.phonemes.size() - i);
    if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
    const auto& fa = a.phonemes[i].features;
    const auto& fb = b.phonemes[j].features;
    double diff = 0;
    for (std::size_t k = 0; k < fa.size(); ++k) diff += fa[k] != fb[k];
    const double v = std::min({go(i + 1, j) + 1, go(i, j + 1) + 1,
                               go(i + 1, j + 1) + diff / static_cast<double>(fa.size())});
    memo[{i, j}] = v;
    return v;
  };
  return go(0, 0);
}

}  // namespace

TEST(FeatureTable, ShippedCoversCoreInventory) {
  EXPECT_GE(table().symbols().size(), 100u);
  for (auto s : {"a", "e", "i", "o", "u", "ə", "ʃ", "ŋ", "θ", "ɾ", "x", "w", "h"}) {
    EXPECT_NE(table().find(s), nullptr) << s;
  }
  EXPECT_TRUE(table().feature_index("syl").has_value());
}

TEST(FeatureTable, ParseRejectsBadRows) {
  EXPECT_THROW(FeatureTable::parse("symbol,syl\na,+,-\n"), SchemaError);
  EXPECT_THROW(FeatureTable::parse("symbol,syl\na,x\n"), SchemaError);
  const auto t = FeatureTable::parse("symbol,syl,son\na,+,+\nt,-,0\n");
  EXPECT_EQ(t.feature_count(), 2u);
  EXPECT_EQ(*t.find("t"), (FeatureVector{-1, 0}));
}

TEST(Ipa, StressAndModifiers) {
  const auto t = parse_ipa("ˈbɪəd.ɪŋ", table());
  EXPECT_EQ(t.stress_marks, (std::set<std::size_t>{1}));
  const auto longa = parse_ipa("aː", table());
  ASSERT_EQ(longa.phonemes.size(), 1u);
  EXPECT_EQ(longa.phonemes[0].symbol, "aː");
  EXPECT_NE(longa.phonemes[0].features, table().find("a") ? *table().find("a") : FeatureVector{});
}

TEST(Ipa, UnknownSymbolIsCoverageError) {
  try {
    parse_ipa("ka☃", table());
    FAIL();
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.symbol(), "☃");
  }
}

TEST(Ipa, RhymeSegmentFromLastStress) {
  EXPECT_EQ(extract_rhyme_segment(parse_ipa("ˈbjuːtɪfəl", table())).ipa(), "uːtɪfəl");
  EXPECT_EQ(extract_rhyme_segment(parse_ipa("ɪnˈsaɪd", table())).ipa(), "aɪd");
  EXPECT_EQ(extract_rhyme_segment(parse_ipa("kat", table())).ipa(), "at");
  EXPECT_THROW(extract_rhyme_segment(parse_ipa("pst", table())), NoNucleusError);
}

TEST(Ipa, Components) {
  const auto c = decompose_components(seg("iːdz"));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].kind, Component::Kind::vowel);
  EXPECT_EQ(c[0].symbols, "iː");
  EXPECT_EQ(c[1].symbols, "dz");
  EXPECT_EQ(c[1].position, 1u);
}

TEST(Distance, KnownValues) {
  EXPECT_EQ(segment_distance(seg("at"), seg("at")), 0.0);
  EXPECT_DOUBLE_EQ(segment_distance(seg("at"), seg("a")), 1.0);
  EXPECT_DOUBLE_EQ(segment_distance(seg(""), seg("abc")), 3.0);
  const auto& t = *table().find("t");
  const auto& d = *table().find("d");
  double diff = 0;
  for (std::size_t k = 0; k < t.size(); ++k) diff += t[k] != d[k];
  EXPECT_DOUBLE_EQ(segment_distance(seg("at"), seg("ad")), diff / t.size());
  EXPECT_DOUBLE_EQ(segment_distance(seg("at"), seg("a"), true), 0.5);
  EXPECT_EQ(segment_distance(seg(""), seg(""), true), 0.0);
}

TEST(Distance, MatchesReferenceRecursion) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto a = synth::random_segment(rng, table(), 0, 7);
    const auto b = synth::random_segment(rng, table(), 0, 7);
    EXPECT_NEAR(segment_distance(a, b), reference_distance(a, b), 1e-12);
  }
}
