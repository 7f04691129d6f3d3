#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rhyme/corpus.hpp"
#include "rhyme/transcriber.hpp"

namespace rhyme {

using Chains = std::vector<std::vector<std::size_t>>;

struct Annotation {
  std::string annotator;
  std::string poem_id;
  Chains chains;
};

// Chains strictly increasing, length >= 2, pairwise disjoint, and (when the
// poem length is known) within bounds. Throws SchemaError.
void validate(const Annotation& a, std::optional<std::size_t> poem_length = std::nullopt);

Annotation annotation_from_json(const nlohmann::json& doc);
nlohmann::json annotation_to_json(const Annotation& a);
Annotation load_annotation(const std::filesystem::path& path);
void save_annotation(const Annotation& a, const std::filesystem::path& path);

// All annotations of one annotator, keyed by poem id.
struct AnnotationSet {
  std::string annotator;
  std::map<std::string, Annotation> poems;
};

// Reads every *.json file in a directory. All files must name the same
// annotator and no poem may appear twice.
AnnotationSet load_annotation_dir(const std::filesystem::path& dir);

using Link = std::pair<std::size_t, std::size_t>;  // first < second

struct LinkSet {
  std::string poem_id;
  std::set<Link> links;

  std::size_t size() const noexcept { return links.size(); }
};

LinkSet chains_to_links(const std::string& poem_id, const Chains& chains);
LinkSet chains_to_links(const Annotation& a);

// 2|a ∩ b| / (|a| + |b|), 1.0 when both are empty.
double f1_links(const LinkSet& a, const LinkSet& b);

// Accumulates link counts across poems for micro-averaged F1.
struct LinkCounts {
  std::size_t shared = 0;
  std::size_t left = 0;
  std::size_t right = 0;

  void add(const LinkSet& a, const LinkSet& b);
  std::optional<double> f1() const;  // nullopt when nothing was added
  double f1_or_one() const;          // empty vs empty counts as agreement
};

struct IaaReport {
  std::string language;
  std::string annotator1;
  std::string annotator2;
  double micro_f1 = 0.0;  // links pooled across poems
  double macro_f1 = 0.0;  // mean of per-poem F1
  std::vector<std::pair<std::string, double>> per_poem;
};

// Both sets must cover the same poems; otherwise CoverageMismatchError with
// the poem ids present on only one side.
IaaReport iaa_report(const std::string& language, const AnnotationSet& a, const AnnotationSet& b);

void write_iaa_csv(std::ostream& out, const std::vector<IaaReport>& reports);
void write_iaa_per_poem_csv(std::ostream& out, const std::vector<IaaReport>& reports);

struct AgreementRow {
  bool agreement = false;
  std::size_t line_distance = 1;
  double phon_distance = 0.0;
  std::string corpus;

  friend bool operator==(const AgreementRow&, const AgreementRow&) = default;
};

struct AgreementDataset {
  std::vector<AgreementRow> rows;
  std::size_t skipped = 0;  // pairs whose lines could not be transcribed
  bool normalized = false;
};

// One row per chain-consecutive pair from either annotator (deduplicated).
// Agreement means both annotators put the two lines in one chain.
AgreementDataset consecutive_pairs_dataset(const AnnotationSet& a, const AnnotationSet& b,
                                           const Corpus& corpus, const Transcriber& transcriber,
                                           bool normalize = false);

void write_agreement_csv(std::ostream& out, const std::vector<AgreementRow>& rows);
std::vector<AgreementRow> read_agreement_csv(std::istream& in);
std::vector<AgreementRow> load_agreement_csv(const std::filesystem::path& path);

}  // namespace rhyme
