#include "rhyme/sweep.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <ostream>
#include <set>

#include "rhyme/error.hpp"

namespace rhyme {
namespace {

struct Job {
  std::size_t size;
  std::size_t sample;
};

SweepRow run_job(const Job& job, const Corpus& pool, const std::vector<const Poem*>& gold_poems,
                 const std::vector<AnnotationSet>& gold, const Transcriber& transcriber,
                 const SweepConfig& config) {
  SweepRow row;
  row.language = pool.language();
  row.size = job.size;
  row.sample = job.sample;
  row.f1.assign(gold.size(), 0.0);
  try {
    const auto sample = sample_poems(pool, job.size, derive_seed(config.seed, job.size, job.sample));
    const auto model = train_model(sample, transcriber, config.tagger, Execution::serial);
    std::map<std::string, TaggedPoem> tagged;
    for (const auto& t : tag_poems(model, gold_poems, transcriber, Execution::serial)) {
      tagged.emplace(t.poem_id, t);
    }
    for (std::size_t k = 0; k < gold.size(); ++k) {
      LinkCounts counts;
      for (const auto& [id, ann] : gold[k].poems) {
        counts.add(chains_to_links(id, tagged.at(id).chains), chains_to_links(ann));
      }
      row.f1[k] = counts.f1_or_one();
    }
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
    std::fill(row.f1.begin(), row.f1.end(), 0.0);
  }
  return row;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<std::size_t> default_size_ladder() {
  std::vector<std::size_t> sizes{1000};
  for (std::size_t k = 2; k <= 10; ++k) sizes.push_back(k * 1000);
  for (std::size_t k = 2; k <= 10; ++k) sizes.push_back(k * 10000);
  for (std::size_t k = 2; k <= 10; ++k) sizes.push_back(k * 100000);
  return sizes;
}

SweepResult run_sweep(const Corpus& corpus, const std::vector<AnnotationSet>& gold,
                      const Transcriber& transcriber, const SweepConfig& config, Execution exec) {
  validate(config.tagger);
  if (gold.empty()) throw ValidationError("sweep needs at least one gold annotation set");
  if (config.samples == 0) throw ValidationError("samples must be >= 1");

  std::set<std::string> gold_ids;
  for (const auto& set : gold) {
    for (const auto& [id, ann] : set.poems) {
      const Poem* poem = corpus.find(id);
      if (!poem) throw ValidationError("gold poem " + id + " is not in the corpus");
      validate(ann, poem->size());
      gold_ids.insert(id);
    }
  }
  std::vector<const Poem*> gold_poems;
  for (const auto& id : gold_ids) gold_poems.push_back(corpus.find(id));

  std::optional<Corpus> filtered;
  if (config.exclude_gold) {
    std::vector<Poem> rest;
    for (const auto& p : corpus.poems())
      if (!gold_ids.contains(p.id)) rest.push_back(p);
    if (rest.empty()) throw InsufficientDataError("no poems left after excluding gold poems");
    filtered.emplace(corpus.language(), std::move(rest));
  }
  const Corpus& pool = filtered ? *filtered : corpus;

  SweepResult result;
  std::vector<Job> jobs;
  for (const auto size : config.sizes) {
    if (size == 0) throw ValidationError("sweep sizes must be positive");
    if (size > pool.line_count()) {
      spdlog::warn("skipping size {}: corpus has only {} lines", size, pool.line_count());
      result.skipped_sizes.push_back(size);
      continue;
    }
    for (std::size_t s = 0; s < config.samples; ++s) jobs.push_back({size, s});
  }

  result.rows.resize(jobs.size());
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      result.rows[i] = run_job(jobs[i], pool, gold_poems, gold, transcriber, config);
    }
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      result.rows[i] = run_job(jobs[i], pool, gold_poems, gold, transcriber, config);
    }
  }
  for (const auto& row : result.rows) {
    if (row.failed) {
      spdlog::warn("size {} sample {} failed: {}", row.size, row.sample, row.error);
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "language,size,sample,f1_ann1,f1_ann2,failed\n";
  for (const auto& r : rows) {
    const auto f1 = [&](std::size_t k) {
      return k < r.f1.size() ? fmt::format("{:.6f}", r.f1[k]) : std::string("NA");
    };
    out << fmt::format("{},{},{},{},{},{}\n", r.language, r.size, r.sample, f1(0), f1(1),
                       r.failed ? 1 : 0);
  }
}

std::vector<SizeSummary> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::map<std::size_t, std::vector<const SweepRow*>> by_size;
  for (const auto& r : rows) by_size[r.size].push_back(&r);
  std::vector<SizeSummary> out;
  for (const auto& [size, group] : by_size) {
    SizeSummary s;
    s.size = size;
    const std::size_t annotators = group.front()->f1.size();
    for (std::size_t k = 0; k < annotators; ++k) {
      std::vector<double> values;
      double sum = 0.0;
      for (const auto* r : group) {
        values.push_back(r->f1[k]);
        sum += r->f1[k];
      }
      s.median_f1.push_back(median(std::move(values)));
      s.mean_f1.push_back(sum / static_cast<double>(group.size()));
    }
    for (const auto* r : group) s.failed += r->failed;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(start, comma - start);
    start = comma + 1;
    if (item.empty()) continue;
    std::size_t mult = 1;
    const char suffix = static_cast<char>(std::tolower(static_cast<unsigned char>(item.back())));
    if (suffix == 'k') mult = 1000;
    if (suffix == 'm') mult = 1000000;
    if (mult != 1) item.pop_back();
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v) * mult);
    } catch (const std::exception&) {
      throw ValidationError("bad size '" + text.substr(0, 64) + "'");
    }
  }
  if (out.empty()) throw ValidationError("size list is empty");
  return out;
}

}  // namespace rhyme
