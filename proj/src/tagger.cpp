#include "rhyme/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>

#include "rhyme/error.hpp"
#include "rhyme/text.hpp"
#include "rhyme/union_find.hpp"

namespace rhyme {
namespace {

constexpr std::uint32_t kUnknownId = std::numeric_limits<std::uint32_t>::max();

struct PreparedLine {
  std::size_t index_in_poem = 0;
  std::string token;
  std::vector<std::uint32_t> components;
};

struct TrainingCandidate {
  std::uint32_t a;
  std::uint32_t b;
  bool seeded;
};

std::string line_context(const Poem& poem, std::size_t index) {
  return "poem '" + poem.id + "' line " + std::to_string(index);
}

// Transcribes a line and returns its rhyme segment components, or nullopt
// when the line has no final word or no vowel to anchor a rhyme.
std::optional<std::vector<Component>> line_components(const Poem& poem, const Line& line,
                                                      const Transcriber& transcriber) {
  if (!line_final_word(line)) return std::nullopt;
  std::shared_ptr<const Transcription> t;
  try {
    t = transcriber.transcribe(line.text, poem.language);
  } catch (const Error& e) {
    throw TranscriptionError(line_context(poem, line.index_in_poem) + ": " + e.what());
  }
  try {
    return decompose_components(extract_rhyme_segment(*t));
  } catch (const NoNucleusError&) {
    return std::nullopt;
  }
}

std::vector<std::uint32_t> intern_all(RhymeModel& model, const std::vector<Component>& comps) {
  std::vector<std::uint32_t> ids;
  ids.reserve(comps.size());
  for (const auto& c : comps) ids.push_back(model.intern(c.symbols));
  return ids;
}

struct PositionCounts {
  std::uint32_t rhymed = 0;
  std::uint32_t total = 0;
};

std::vector<std::unordered_map<std::uint64_t, double>> estimate_tables(
    const std::vector<std::vector<std::uint32_t>>& components,
    const std::vector<TrainingCandidate>& candidates,
    const std::vector<char>& rhymed, double alpha) {
  std::vector<std::unordered_map<std::uint64_t, PositionCounts>> counts;
  std::size_t n_rhymed = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& x = components[candidates[k].a];
    const auto& y = components[candidates[k].b];
    const std::size_t len = std::max(x.size(), y.size());
    if (counts.size() < len) counts.resize(len);
    const bool r = rhymed[k] != 0;
    n_rhymed += r;
    for (std::size_t p = 0; p < len; ++p) {
      const auto a = p < x.size() ? x[p] : RhymeModel::kEmptyId;
      const auto b = p < y.size() ? y[p] : RhymeModel::kEmptyId;
      auto& e = counts[p][RhymeModel::pair_key(a, b)];
      ++e.total;
      e.rhymed += r;
    }
  }
  const std::size_t n_unrhymed = candidates.size() - n_rhymed;
  // Reweight rhymed occurrences so both classes carry equal total mass.
  double w = 1.0;
  if (n_rhymed == 0) {
    w = 0.0;
  } else if (n_unrhymed > 0) {
    w = static_cast<double>(n_unrhymed) / static_cast<double>(n_rhymed);
  }
  std::vector<std::unordered_map<std::uint64_t, double>> tables(counts.size());
  for (std::size_t p = 0; p < counts.size(); ++p) {
    tables[p].reserve(counts[p].size());
    for (const auto& [key, c] : counts[p]) {
      const double r = w * c.rhymed;
      const double u = c.total - c.rhymed;
      tables[p].emplace(key, (r + alpha) / (r + u + 2.0 * alpha));
    }
  }
  return tables;
}

}  // namespace

CollocationStats collect_collocations(const Sample& sample, std::size_t window) {
  if (window == 0) throw ValidationError("window must be >= 1");
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::string> names;
  std::vector<std::size_t> token_counts;
  std::unordered_map<std::uint64_t, std::size_t> pair_counts;
  CollocationStats stats;

  std::vector<std::pair<std::size_t, std::uint32_t>> finals;
  for (const Poem* poem : sample.poems) {
    finals.clear();
    for (const auto& line : poem->lines) {
      auto w = line_final_word(line);
      if (!w) continue;
      auto [it, inserted] = ids.try_emplace(*w, static_cast<std::uint32_t>(names.size()));
      if (inserted) {
        names.push_back(*w);
        token_counts.push_back(0);
      }
      finals.emplace_back(line.index_in_poem, it->second);
    }
    for (std::size_t i = 0; i < finals.size(); ++i) {
      for (std::size_t j = i + 1; j < finals.size(); ++j) {
        if (finals[j].first - finals[i].first > window) break;
        ++pair_counts[RhymeModel::pair_key(finals[i].second, finals[j].second)];
        ++token_counts[finals[i].second];
        ++token_counts[finals[j].second];
        ++stats.n_pairs;
      }
    }
  }
  for (const auto& [key, count] : pair_counts) {
    const auto a = static_cast<std::uint32_t>(key >> 32);
    const auto b = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
    stats.pair_counts.emplace(TokenPair::of(names[a], names[b]), count);
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (token_counts[i] > 0) stats.token_counts.emplace(names[i], token_counts[i]);
  }
  return stats;
}

double t_score(double observed, double fx, double fy, double n) {
  if (!(observed > 0)) throw ValidationError("t-score is undefined for zero observations");
  if (!(n > 0)) throw ValidationError("t-score needs n >= 1");
  return (observed - fx * fy / n) / std::sqrt(observed);
}

std::set<TokenPair> seed_training_pairs(const CollocationStats& stats, double t_min,
                                        std::size_t min_count) {
  std::set<TokenPair> out;
  const double slots = 2.0 * static_cast<double>(stats.n_pairs);
  for (const auto& [pair, count] : stats.pair_counts) {
    if (count < min_count || count == 0) continue;
    const double fx = static_cast<double>(stats.token_counts.at(pair.first));
    const double fy = static_cast<double>(stats.token_counts.at(pair.second));
    if (t_score(static_cast<double>(count), fx, fy, slots) >= t_min) out.insert(pair);
  }
  return out;
}

void validate(const TaggerConfig& c) {
  if (c.window < 1) throw ValidationError("window must be >= 1");
  if (!(c.tau > 0.0 && c.tau < 1.0)) throw ValidationError("tau must lie in (0, 1)");
  if (!(c.alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (c.min_count < 1) throw ValidationError("min_count must be >= 1");
  if (c.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (!(c.convergence >= 0.0)) throw ValidationError("convergence must be >= 0");
}

RhymeModel::RhymeModel(TaggerConfig config, std::string language)
    : config_(config), language_(std::move(language)) {
  validate(config_);
  names_.emplace_back(kEmpty);
  ids_.emplace(std::string(kEmpty), kEmptyId);
}

std::size_t RhymeModel::entry_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : tables_) n += t.size();
  return n;
}

std::uint32_t RhymeModel::intern(std::string_view component) {
  auto [it, inserted] =
      ids_.try_emplace(std::string(component), static_cast<std::uint32_t>(names_.size()));
  if (inserted) names_.emplace_back(component);
  return it->second;
}

std::vector<std::uint32_t> RhymeModel::lookup(std::span<const Component> components) const {
  std::vector<std::uint32_t> out;
  out.reserve(components.size());
  for (const auto& c : components) {
    auto it = ids_.find(c.symbols);
    out.push_back(it == ids_.end() ? kUnknownId : it->second);
  }
  return out;
}

double RhymeModel::probability(std::size_t position, std::string_view a,
                               std::string_view b) const {
  auto ia = ids_.find(std::string(a));
  auto ib = ids_.find(std::string(b));
  if (ia == ids_.end() || ib == ids_.end() || position >= tables_.size()) return 0.5;
  auto it = tables_[position].find(pair_key(ia->second, ib->second));
  return it == tables_[position].end() ? 0.5 : it->second;
}

double RhymeModel::score_ids(std::span<const std::uint32_t> a,
                             std::span<const std::uint32_t> b) const {
  const std::size_t len = std::max(a.size(), b.size());
  if (len == 0) return 0.5;
  double log_sum = 0.0;
  for (std::size_t p = 0; p < len; ++p) {
    const auto x = p < a.size() ? a[p] : kEmptyId;
    const auto y = p < b.size() ? b[p] : kEmptyId;
    double prob = 0.5;
    if (p < tables_.size() && x != kUnknownId && y != kUnknownId) {
      auto it = tables_[p].find(pair_key(x, y));
      if (it != tables_[p].end()) prob = it->second;
    }
    log_sum += std::log(prob);
  }
  return std::exp(log_sum / static_cast<double>(len));
}

double RhymeModel::score(std::span<const Component> a, std::span<const Component> b) const {
  return score_ids(lookup(a), lookup(b));
}

void RhymeModel::set_tables(std::vector<std::unordered_map<std::uint64_t, double>> tables) {
  tables_ = std::move(tables);
}

void RhymeModel::set_training_info(std::size_t iterations_run, std::size_t training_lines) {
  iterations_run_ = iterations_run;
  training_lines_ = training_lines;
}

nlohmann::json RhymeModel::to_json() const {
  nlohmann::json tables = nlohmann::json::object();
  for (std::size_t p = 0; p < tables_.size(); ++p) {
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [key, prob] : tables_[p]) {
      std::string a = names_[key >> 32];
      std::string b = names_[key & 0xFFFFFFFFu];
      if (b < a) std::swap(a, b);
      entries[a + "|" + b] = prob;
    }
    tables[std::to_string(p)] = std::move(entries);
  }
  return {{"version", kFormatVersion},
          {"language", language_},
          {"window", config_.window},
          {"tau", config_.tau},
          {"alpha", config_.alpha},
          {"t_min", config_.t_min},
          {"min_count", config_.min_count},
          {"max_iter", config_.max_iter},
          {"convergence", config_.convergence},
          {"iterations_run", iterations_run_},
          {"training_lines", training_lines_},
          {"tables", std::move(tables)}};
}

RhymeModel RhymeModel::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw SchemaError("unsupported model version " + doc.at("version").dump());
    }
    TaggerConfig c;
    c.window = doc.at("window").get<std::size_t>();
    c.tau = doc.at("tau").get<double>();
    c.alpha = doc.at("alpha").get<double>();
    c.t_min = doc.at("t_min").get<double>();
    c.min_count = doc.at("min_count").get<std::size_t>();
    c.max_iter = doc.value("max_iter", c.max_iter);
    c.convergence = doc.value("convergence", c.convergence);
    RhymeModel model(c, doc.at("language").get<std::string>());
    model.set_training_info(doc.at("iterations_run").get<std::size_t>(),
                            doc.at("training_lines").get<std::size_t>());
    std::vector<std::unordered_map<std::uint64_t, double>> tables;
    for (const auto& [pos_key, entries] : doc.at("tables").items()) {
      std::size_t used = 0;
      const std::size_t p = std::stoul(pos_key, &used);
      if (used != pos_key.size()) throw SchemaError("bad table position '" + pos_key + "'");
      if (tables.size() <= p) tables.resize(p + 1);
      for (const auto& [pair, prob] : entries.items()) {
        const auto bar = pair.find('|');
        if (bar == std::string::npos) throw SchemaError("bad component pair '" + pair + "'");
        const double v = prob.get<double>();
        if (!(v >= 0.0 && v <= 1.0)) throw SchemaError("probability out of range for " + pair);
        const auto a = model.intern(pair.substr(0, bar));
        const auto b = model.intern(pair.substr(bar + 1));
        tables[p].emplace(pair_key(a, b), v);
      }
    }
    model.set_tables(std::move(tables));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw SchemaError("malformed model table position");
  }
}

void save_model(const RhymeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model " + path.string());
  out << model.to_json().dump(1) << '\n';
  if (!out) throw Error("failed writing model " + path.string());
}

RhymeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("model " + path.string() + " is not JSON: " + e.what());
  }
  return RhymeModel::from_json(doc);
}

std::vector<double> score_candidates(const RhymeModel& model,
                                     std::span<const std::vector<std::uint32_t>> components,
                                     std::span<const CandidatePair> candidates, Execution exec) {
  std::vector<double> out(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      out[k] = model.score_ids(components[candidates[k].a], components[candidates[k].b]);
    }
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out[k] = model.score_ids(components[candidates[k].a], components[candidates[k].b]);
  }
  return out;
}

RhymeModel estimate_model(const std::set<TokenPair>& seed_pairs, const Sample& sample,
                          const Transcriber& transcriber, const TaggerConfig& config,
                          Execution exec) {
  validate(config);
  if (seed_pairs.empty()) throw CannotTrainError("no seed pairs to train from");
  if (sample.poems.empty()) throw CannotTrainError("training sample is empty");
  RhymeModel model(config, sample.poems.front()->language);

  std::vector<PreparedLine> lines;
  std::vector<TrainingCandidate> candidates;
  for (const Poem* poem : sample.poems) {
    const std::size_t first = lines.size();
    for (const auto& line : poem->lines) {
      auto comps = line_components(*poem, line, transcriber);
      if (!comps) continue;
      lines.push_back({line.index_in_poem, *line_final_word(line), intern_all(model, *comps)});
    }
    for (std::size_t i = first; i < lines.size(); ++i) {
      for (std::size_t j = i + 1; j < lines.size(); ++j) {
        if (lines[j].index_in_poem - lines[i].index_in_poem > config.window) break;
        const bool seeded = seed_pairs.contains(TokenPair::of(lines[i].token, lines[j].token));
        candidates.push_back(
            {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), seeded});
      }
    }
  }
  if (candidates.empty()) throw CannotTrainError("sample has no candidate line pairs");

  std::vector<std::vector<std::uint32_t>> components;
  components.reserve(lines.size());
  for (auto& l : lines) components.push_back(std::move(l.components));

  std::vector<CandidatePair> pairs;
  pairs.reserve(candidates.size());
  std::vector<char> rhymed(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    pairs.push_back({candidates[k].a, candidates[k].b});
    rhymed[k] = candidates[k].seeded;
  }

  std::size_t iterations = 0;
  for (std::size_t it = 1; it <= config.max_iter; ++it) {
    model.set_tables(estimate_tables(components, candidates, rhymed, config.alpha));
    iterations = it;
    if (it == config.max_iter) break;
    const auto scores = score_candidates(model, components, pairs, exec);
    std::size_t before = 0;
    std::size_t changed = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      const char now = scores[k] >= config.tau;
      before += rhymed[k];
      changed += now != rhymed[k];
      rhymed[k] = now;
    }
    const double change =
        static_cast<double>(changed) / static_cast<double>(std::max<std::size_t>(before, 1));
    if (change < config.convergence) break;
  }
  model.set_training_info(iterations, sample.line_count());
  return model;
}

RhymeModel train_model(const Sample& sample, const Transcriber& transcriber,
                       const TaggerConfig& config, Execution exec) {
  validate(config);
  const auto stats = collect_collocations(sample, config.window);
  const auto seeds = seed_training_pairs(stats, config.t_min, config.min_count);
  if (seeds.empty()) {
    throw CannotTrainError("no collocation passed t_min=" + std::to_string(config.t_min) +
                           " and min_count=" + std::to_string(config.min_count));
  }
  return estimate_model(seeds, sample, transcriber, config, exec);
}

double score_pair(const RhymeModel& model, const RhymeSegment& a, const RhymeSegment& b) {
  const auto ca = decompose_components(a);
  const auto cb = decompose_components(b);
  return model.score(ca, cb);
}

std::vector<std::vector<std::size_t>> chains_from_pairs(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> accepted) {
  UnionFind uf(n);
  for (const auto& [a, b] : accepted) {
    if (a >= n || b >= n) throw ValidationError("pair index out of range");
    uf.unite(a, b);
  }
  return uf.groups(2);
}

TaggedPoem tag_poem(const RhymeModel& model, const Poem& poem, const Transcriber& transcriber) {
  TaggedPoem out;
  out.poem_id = poem.id;
  std::vector<std::pair<std::size_t, std::vector<std::uint32_t>>> usable;
  for (const auto& line : poem.lines) {
    auto comps = line_components(poem, line, transcriber);
    if (comps) usable.emplace_back(line.index_in_poem, model.lookup(*comps));
  }
  std::vector<std::pair<std::size_t, std::size_t>> accepted;
  const std::size_t window = model.config().window;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (std::size_t j = i + 1; j < usable.size(); ++j) {
      if (usable[j].first - usable[i].first > window) break;
      const double s = model.score_ids(usable[i].second, usable[j].second);
      out.pair_scores.emplace(std::make_pair(usable[i].first, usable[j].first), s);
      if (s >= model.config().tau) accepted.emplace_back(usable[i].first, usable[j].first);
    }
  }
  out.chains = chains_from_pairs(poem.size(), accepted);
  return out;
}

std::vector<TaggedPoem> tag_poems(const RhymeModel& model, std::span<const Poem* const> poems,
                                  const Transcriber& transcriber, Execution exec) {
  std::vector<TaggedPoem> out(poems.size());
  const auto n = static_cast<std::ptrdiff_t>(poems.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = tag_poem(model, *poems[i], transcriber);
    return out;
  }
  std::vector<std::exception_ptr> errors(poems.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = tag_poem(model, *poems[i], transcriber);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace rhyme
