#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rhyme/corpus.hpp"
#include "rhyme/evaluation.hpp"
#include "rhyme/execution.hpp"
#include "rhyme/tagger.hpp"
#include "rhyme/transcriber.hpp"

namespace rhyme {

// 1k, 2k..10k, 20k..100k, 200k..1M lines.
std::vector<std::size_t> default_size_ladder();

struct SweepConfig {
  std::vector<std::size_t> sizes = default_size_ladder();
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  TaggerConfig tagger;
  bool exclude_gold = false;  // keep annotated poems out of training samples
};

struct SweepRow {
  std::string language;
  std::size_t size = 0;
  std::size_t sample = 0;
  std::vector<double> f1;  // pooled chain-link F1 per gold annotator
  bool failed = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (size, sample)
  std::vector<std::size_t> skipped_sizes;
};

// For every size and sample index: draw a sample with seed
// derive_seed(config.seed, size, index), train, tag the gold poems and score
// them against each annotator. A failed job yields a row flagged `failed`
// with F1 0. Jobs run in parallel; the serial path is the reference.
SweepResult run_sweep(const Corpus& corpus, const std::vector<AnnotationSet>& gold,
                      const Transcriber& transcriber, const SweepConfig& config,
                      Execution exec = Execution::parallel);

// language,size,sample,f1_ann1,f1_ann2,failed
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct SizeSummary {
  std::size_t size = 0;
  std::vector<double> median_f1;  // per annotator; failed rows count as 0
  std::vector<double> mean_f1;
  std::size_t failed = 0;
};

std::vector<SizeSummary> summarize_sweep(const std::vector<SweepRow>& rows);

std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace rhyme
