#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rhyme/corpus.hpp"
#include "rhyme/execution.hpp"
#include "rhyme/phonetics.hpp"
#include "rhyme/transcriber.hpp"

namespace rhyme {

// Unordered pair of line-final tokens, stored with first <= second.
struct TokenPair {
  std::string first;
  std::string second;

  static TokenPair of(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
  }
  friend auto operator<=>(const TokenPair&, const TokenPair&) = default;
};

struct CollocationStats {
  std::map<TokenPair, std::size_t> pair_counts;
  std::map<std::string, std::size_t> token_counts;  // pair slots holding the token
  std::size_t n_pairs = 0;
};

// Counts every unordered pair of line-final tokens from the same poem whose
// lines are at most `window` apart.
CollocationStats collect_collocations(const Sample& sample, std::size_t window);

// (o - fx*fy/n) / sqrt(o)
double t_score(double observed, double fx, double fy, double n);

// Pairs with count >= min_count and T-score >= t_min. The expectation uses
// the slot total (2 * n_pairs) so that fx*fy/n is the independence estimate
// for an unordered pair.
std::set<TokenPair> seed_training_pairs(const CollocationStats& stats, double t_min,
                                        std::size_t min_count);

struct TaggerConfig {
  std::size_t window = 7;
  double tau = 0.8;
  double alpha = 1.0;
  double t_min = 2.0;
  std::size_t min_count = 2;
  std::size_t max_iter = 20;
  double convergence = 0.01;  // stop when the rhymed set changes by less than this
};

void validate(const TaggerConfig& config);

// Learned positional component-pair probabilities.
class RhymeModel {
 public:
  static constexpr std::string_view kEmpty = "∅";
  static constexpr std::uint32_t kEmptyId = 0;
  static constexpr int kFormatVersion = 1;

  RhymeModel(TaggerConfig config, std::string language);

  const TaggerConfig& config() const noexcept { return config_; }
  const std::string& language() const noexcept { return language_; }
  std::size_t iterations_run() const noexcept { return iterations_run_; }
  std::size_t training_lines() const noexcept { return training_lines_; }
  std::size_t positions() const noexcept { return tables_.size(); }
  std::size_t entry_count() const noexcept;

  // P_p(a, b); 0.5 (the smoothed prior) for pairs never seen in training.
  double probability(std::size_t position, std::string_view a, std::string_view b) const;

  // Geometric mean of positional probabilities; missing positions pair with
  // the empty component.
  double score(std::span<const Component> a, std::span<const Component> b) const;

  // Interned fast path used by training and the scoring kernel.
  std::uint32_t intern(std::string_view component);
  std::vector<std::uint32_t> lookup(std::span<const Component> components) const;
  double score_ids(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) const;
  void set_tables(std::vector<std::unordered_map<std::uint64_t, double>> tables);
  void set_training_info(std::size_t iterations_run, std::size_t training_lines);

  static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) noexcept {
    if (b < a) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  nlohmann::json to_json() const;
  static RhymeModel from_json(const nlohmann::json& doc);

 private:
  TaggerConfig config_;
  std::string language_;
  std::size_t iterations_run_ = 0;
  std::size_t training_lines_ = 0;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> names_;
  std::vector<std::unordered_map<std::uint64_t, double>> tables_;
};

void save_model(const RhymeModel& model, const std::filesystem::path& path);
RhymeModel load_model(const std::filesystem::path& path);

// Learns the model from seed pairs: mark candidates whose token pair is a
// seed, estimate class-balanced positional probabilities, re-tag by score,
// repeat until the rhymed set is stable or max_iter passes have run.
RhymeModel estimate_model(const std::set<TokenPair>& seed_pairs, const Sample& sample,
                          const Transcriber& transcriber, const TaggerConfig& config,
                          Execution exec = Execution::parallel);

// collect_collocations -> seed_training_pairs -> estimate_model.
RhymeModel train_model(const Sample& sample, const Transcriber& transcriber,
                       const TaggerConfig& config, Execution exec = Execution::parallel);

double score_pair(const RhymeModel& model, const RhymeSegment& a, const RhymeSegment& b);

struct TaggedPoem {
  std::string poem_id;
  std::vector<std::vector<std::size_t>> chains;
  std::map<std::pair<std::size_t, std::size_t>, double> pair_scores;
};

// Scores every line pair within the model window, accepts pairs scoring at
// least tau and returns connected components of the accepted graph.
TaggedPoem tag_poem(const RhymeModel& model, const Poem& poem, const Transcriber& transcriber);

// tag_poem over many poems; parallel across poems.
std::vector<TaggedPoem> tag_poems(const RhymeModel& model, std::span<const Poem* const> poems,
                                  const Transcriber& transcriber,
                                  Execution exec = Execution::parallel);

// Chains (size >= 2) formed by the accepted pairs over n lines.
std::vector<std::vector<std::size_t>> chains_from_pairs(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> accepted);

struct CandidatePair {
  std::uint32_t a;
  std::uint32_t b;
};

// Kernel: score of each candidate from per-line interned components.
std::vector<double> score_candidates(const RhymeModel& model,
                                     std::span<const std::vector<std::uint32_t>> components,
                                     std::span<const CandidatePair> candidates, Execution exec);

}  // namespace rhyme
