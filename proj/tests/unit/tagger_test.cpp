#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "rhyme/error.hpp"
#include "rhyme/tagger.hpp"
#include "rhyme/union_find.hpp"
#include "synthetic.hpp"

using namespace rhyme;

namespace {

std::shared_ptr<Transcriber> toy_transcriber() {
  auto lex = std::make_shared<LexiconBackend>(std::unordered_map<std::string, std::string>{
      {"cat", "ˈkat"}, {"hat", "ˈhat"}, {"dog", "ˈdɔg"}, {"log", "ˈlɔg"}, {"the", "ðə"}});
  return std::make_shared<Transcriber>(lex, FeatureTable::shipped());
}

Corpus toy_corpus() {
  return Corpus("en", {make_poem("toy", "en", std::nullopt, {{"the cat", "the hat", "dog", "log"}})});
}

std::vector<Component> comps(const Transcriber& tr, const std::string& word) {
  return decompose_components(extract_rhyme_segment(*tr.transcribe(word, "en")));
}

struct Planted {
  synth::PlantedCorpus data;
  std::shared_ptr<Transcriber> tr;
};

const Planted& planted() {
  static const Planted p = [] {
    synth::PlantedConfig pc;
    auto data = synth::generate_planted(pc, 8000, 3);
    auto tr = std::make_shared<Transcriber>(synth::lexicon_backend(data.lexicon),
                                            FeatureTable::shipped());
    return Planted{std::move(data), tr};
  }();
  return p;
}

}  // namespace

TEST(UnionFind, Groups) {
  UnionFind uf(7);
  uf.unite(4, 0);
  uf.unite(2, 3);
  uf.unite(3, 6);
  EXPECT_EQ(uf.component_size(6), 3u);
  EXPECT_EQ(uf.groups(2), (std::vector<std::vector<std::size_t>>{{0, 4}, {2, 3, 6}}));
  EXPECT_EQ(uf.groups(1).size(), 4u);
}

TEST(Collocations, CountsWithinWindow) {
  const auto c = toy_corpus();
  const auto stats = collect_collocations(whole_corpus(c), 7);
  EXPECT_EQ(stats.n_pairs, 6u);
  EXPECT_EQ(stats.token_counts.at("cat"), 3u);
  EXPECT_EQ(stats.pair_counts.at(TokenPair::of("hat", "cat")), 1u);
  const auto narrow = collect_collocations(whole_corpus(c), 1);
  EXPECT_EQ(narrow.n_pairs, 3u);
  EXPECT_EQ(narrow.pair_counts.count(TokenPair::of("cat", "dog")), 0u);
  EXPECT_THROW(collect_collocations(whole_corpus(c), 0), ValidationError);
}

TEST(TScore, Formula) {
  EXPECT_DOUBLE_EQ(t_score(4, 10, 10, 100), (4 - 1.0) / 2);
  EXPECT_LT(t_score(1, 50, 50, 100), 0);
  EXPECT_THROW(t_score(0, 1, 1, 1), ValidationError);
}

TEST(TScore, SeedSelection) {
  CollocationStats s;
  s.n_pairs = 100;
  s.pair_counts[TokenPair::of("a", "b")] = 9;   // t = (9 - 10*10/200)/3 = 2.83
  s.pair_counts[TokenPair::of("a", "c")] = 1;   // below min_count
  s.pair_counts[TokenPair::of("d", "e")] = 4;   // t = (4 - 80*80/200)/2 < 0
  s.token_counts = {{"a", 10}, {"b", 10}, {"c", 1}, {"d", 80}, {"e", 80}};
  EXPECT_EQ(seed_training_pairs(s, 2.0, 2), (std::set<TokenPair>{TokenPair::of("a", "b")}));
  EXPECT_TRUE(seed_training_pairs(s, 3.0, 2).empty());
}

TEST(Config, Validation) {
  TaggerConfig c;
  EXPECT_NO_THROW(validate(c));
  c.tau = 1.5;
  EXPECT_THROW(validate(c), ValidationError);
  c = {};
  c.alpha = 0;
  EXPECT_THROW(validate(c), ValidationError);
  c = {};
  c.max_iter = 0;
  EXPECT_THROW(validate(c), ValidationError);
}

// Hand-computed: 2 rhymed and 4 unrhymed candidates, so w = 2.
TEST(Model, ClassBalancedEstimate) {
  auto tr = toy_transcriber();
  const auto c = toy_corpus();
  TaggerConfig cfg;
  cfg.max_iter = 1;
  cfg.tau = 0.7;
  const auto model = estimate_model({TokenPair::of("cat", "hat"), TokenPair::of("dog", "log")},
                                    whole_corpus(c), *tr, cfg, Execution::serial);
  EXPECT_EQ(model.iterations_run(), 1u);
  EXPECT_EQ(model.training_lines(), 4u);
  EXPECT_DOUBLE_EQ(model.probability(0, "a", "a"), 3.0 / 4);
  EXPECT_DOUBLE_EQ(model.probability(0, "a", "ɔ"), 1.0 / 6);
  EXPECT_DOUBLE_EQ(model.probability(0, "ɔ", "a"), 1.0 / 6);
  EXPECT_DOUBLE_EQ(model.probability(1, "t", "g"), 1.0 / 6);
  EXPECT_DOUBLE_EQ(model.probability(1, "t", "k"), 0.5);
  EXPECT_DOUBLE_EQ(model.probability(9, "a", "a"), 0.5);
  EXPECT_DOUBLE_EQ(model.score(comps(*tr, "cat"), comps(*tr, "hat")), 0.75);
  EXPECT_NEAR(model.score(comps(*tr, "cat"), comps(*tr, "dog")), 1.0 / 6, 1e-15);

  const auto tagged = tag_poem(model, c.poems()[0], *tr);
  EXPECT_EQ(tagged.chains, (std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}}));
  EXPECT_DOUBLE_EQ(tagged.pair_scores.at({0, 1}), 0.75);
}

TEST(Model, EmptyComponentPadding) {
  RhymeModel m({}, "en");
  const auto a = m.intern("a");
  const auto t = m.intern("t");
  std::vector<std::unordered_map<std::uint64_t, double>> tables(2);
  tables[0][RhymeModel::pair_key(a, a)] = 0.9;
  tables[1][RhymeModel::pair_key(t, RhymeModel::kEmptyId)] = 0.4;
  m.set_tables(tables);
  const std::vector<Component> at = {{Component::Kind::vowel, 0, "a"},
                                     {Component::Kind::consonant, 1, "t"}};
  const std::vector<Component> a_only = {{Component::Kind::vowel, 0, "a"}};
  EXPECT_DOUBLE_EQ(m.score(at, a_only), std::sqrt(0.9 * 0.4));
  EXPECT_DOUBLE_EQ(m.probability(1, "t", RhymeModel::kEmpty), 0.4);
}

TEST(Model, JsonRoundTripIsExact) {
  const auto& p = planted();
  TaggerConfig cfg;
  const auto model = train_model(sample_poems(p.data.corpus, 4000, 1), *p.tr, cfg);
  const auto doc = model.to_json();
  EXPECT_EQ(doc["version"], RhymeModel::kFormatVersion);
  const auto back = RhymeModel::from_json(doc);
  EXPECT_EQ(back.to_json().dump(), doc.dump());
  EXPECT_EQ(back.entry_count(), model.entry_count());

  const auto path = std::filesystem::temp_directory_path() / "rhyme-model.json";
  save_model(model, path);
  EXPECT_EQ(load_model(path).to_json(), doc);

  auto bad = doc;
  bad["version"] = 99;
  EXPECT_THROW(RhymeModel::from_json(bad), SchemaError);
  bad = doc;
  bad["tables"]["0"] = {{"no-separator", 0.5}};
  EXPECT_THROW(RhymeModel::from_json(bad), SchemaError);
}

TEST(Train, RecoversPlantedChains) {
  const auto& p = planted();
  const auto model = train_model(whole_corpus(p.data.corpus), *p.tr, {});
  LinkCounts counts;
  std::size_t poems = 0;
  for (const auto& poem : p.data.corpus.poems()) {
    if (++poems > 100) break;
    const auto tagged = tag_poem(model, poem, *p.tr);
    const auto got = chains_to_links(poem.id, tagged.chains);
    const auto want = chains_to_links(p.data.truth.poems.at(poem.id));
    counts.add(got, want);
  }
  EXPECT_GE(counts.f1_or_one(), 0.95);
}

TEST(Train, NoSeedsCannotTrain) {
  const auto c = toy_corpus();
  EXPECT_THROW(train_model(whole_corpus(c), *toy_transcriber(), {}), CannotTrainError);
}

TEST(Train, UnknownWordNamesPoemAndLine) {
  auto tr = toy_transcriber();
  const Corpus c("en", {make_poem("odd", "en", std::nullopt, {{"cat", "hat", "zebra"}})});
  TaggerConfig cfg;
  try {
    estimate_model({TokenPair::of("cat", "hat")}, whole_corpus(c), *tr, cfg, Execution::serial);
    FAIL();
  } catch (const TranscriptionError& e) {
    EXPECT_NE(std::string(e.what()).find("poem 'odd' line 2"), std::string::npos) << e.what();
  }
}

TEST(Kernel, ParallelMatchesSerial) {
  const auto& p = planted();
  const auto model = train_model(sample_poems(p.data.corpus, 4000, 2), *p.tr, {});
  std::vector<const Poem*> poems;
  for (const auto& poem : p.data.corpus.poems()) poems.push_back(&poem);
  const auto serial = tag_poems(model, poems, *p.tr, Execution::serial);
  const auto parallel = tag_poems(model, poems, *p.tr, Execution::parallel);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].chains, parallel[i].chains);
    EXPECT_EQ(serial[i].pair_scores, parallel[i].pair_scores);
  }

  auto copy = model;
  std::vector<std::vector<std::uint32_t>> comps_ids;
  for (const auto& [w, ipa] : p.data.lexicon) {
    comps_ids.push_back(copy.lookup(decompose_components(
        extract_rhyme_segment(parse_ipa(ipa, FeatureTable::shipped())))));
  }
  std::vector<CandidatePair> cands;
  for (std::uint32_t i = 0; i < comps_ids.size(); ++i) {
    for (std::uint32_t j = i + 1; j < comps_ids.size(); j += 7) cands.push_back({i, j});
  }
  EXPECT_EQ(score_candidates(copy, comps_ids, cands, Execution::serial),
            score_candidates(copy, comps_ids, cands, Execution::parallel));
}

TEST(Chains, FromPairs) {
  const std::vector<std::pair<std::size_t, std::size_t>> acc = {{0, 2}, {2, 5}, {1, 3}};
  EXPECT_EQ(chains_from_pairs(6, acc), (std::vector<std::vector<std::size_t>>{{0, 2, 5}, {1, 3}}));
  EXPECT_TRUE(chains_from_pairs(3, {}).empty());
}
