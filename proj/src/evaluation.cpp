#include "rhyme/evaluation.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rhyme/error.hpp"
#include "rhyme/phonetics.hpp"
#include "rhyme/text.hpp"

namespace rhyme {
namespace {

constexpr std::string_view kAgreementHeader = "agreement,line_distance,phon_distance,corpus";

std::vector<std::string> coverage_difference(const AnnotationSet& a, const AnnotationSet& b) {
  std::vector<std::string> missing;
  for (const auto& [id, ann] : a.poems)
    if (!b.poems.contains(id)) missing.push_back(id);
  for (const auto& [id, ann] : b.poems)
    if (!a.poems.contains(id)) missing.push_back(id);
  std::sort(missing.begin(), missing.end());
  return missing;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void validate(const Annotation& a, std::optional<std::size_t> poem_length) {
  if (a.annotator.empty()) throw SchemaError("annotation has no annotator");
  if (a.poem_id.empty()) throw SchemaError("annotation has no poem_id");
  std::set<std::size_t> seen;
  for (const auto& chain : a.chains) {
    if (chain.size() < 2) {
      throw SchemaError("poem " + a.poem_id + ": chains need at least two lines");
    }
    for (std::size_t k = 0; k < chain.size(); ++k) {
      if (k > 0 && chain[k] <= chain[k - 1]) {
        throw SchemaError("poem " + a.poem_id + ": chain indices must be strictly increasing");
      }
      if (poem_length && chain[k] >= *poem_length) {
        throw SchemaError("poem " + a.poem_id + ": line " + std::to_string(chain[k]) +
                          " out of range (poem has " + std::to_string(*poem_length) + " lines)");
      }
      if (!seen.insert(chain[k]).second) {
        throw SchemaError("poem " + a.poem_id + ": line " + std::to_string(chain[k]) +
                          " belongs to two chains");
      }
    }
  }
}

Annotation annotation_from_json(const nlohmann::json& doc) {
  Annotation a;
  try {
    a.annotator = doc.at("annotator").get<std::string>();
    a.poem_id = doc.at("poem_id").get<std::string>();
    a.chains = doc.at("chains").get<Chains>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed annotation: ") + e.what());
  }
  validate(a);
  return a;
}

nlohmann::json annotation_to_json(const Annotation& a) {
  return {{"annotator", a.annotator}, {"poem_id", a.poem_id}, {"chains", a.chains}};
}

Annotation load_annotation(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open annotation " + path.string());
  try {
    return annotation_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void save_annotation(const Annotation& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write annotation " + path.string());
  out << annotation_to_json(a).dump() << '\n';
}

AnnotationSet load_annotation_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ValidationError("annotation directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  AnnotationSet set;
  for (const auto& f : files) {
    Annotation a = load_annotation(f);
    if (set.annotator.empty()) set.annotator = a.annotator;
    if (a.annotator != set.annotator) {
      throw SchemaError(f.string() + ": annotator '" + a.annotator + "' differs from '" +
                        set.annotator + "' in the same directory");
    }
    const std::string id = a.poem_id;
    if (!set.poems.emplace(id, std::move(a)).second) {
      throw SchemaError(dir.string() + ": poem " + id + " annotated twice");
    }
  }
  if (set.poems.empty()) throw ValidationError("no annotations in " + dir.string());
  return set;
}

LinkSet chains_to_links(const std::string& poem_id, const Chains& chains) {
  LinkSet out;
  out.poem_id = poem_id;
  for (const auto& chain : chains) {
    for (std::size_t i = 0; i < chain.size(); ++i) {
      for (std::size_t j = i + 1; j < chain.size(); ++j) {
        out.links.emplace(std::min(chain[i], chain[j]), std::max(chain[i], chain[j]));
      }
    }
  }
  return out;
}

LinkSet chains_to_links(const Annotation& a) { return chains_to_links(a.poem_id, a.chains); }

double f1_links(const LinkSet& a, const LinkSet& b) {
  if (a.poem_id != b.poem_id) {
    throw ScopeError("link sets belong to different poems: '" + a.poem_id + "' vs '" + b.poem_id +
                     "'");
  }
  if (a.links.empty() && b.links.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& l : a.links) shared += b.links.contains(l);
  return 2.0 * static_cast<double>(shared) / static_cast<double>(a.size() + b.size());
}

void LinkCounts::add(const LinkSet& a, const LinkSet& b) {
  if (a.poem_id != b.poem_id) {
    throw ScopeError("link sets belong to different poems: '" + a.poem_id + "' vs '" + b.poem_id +
                     "'");
  }
  for (const auto& l : a.links) shared += b.links.contains(l);
  left += a.size();
  right += b.size();
}

std::optional<double> LinkCounts::f1() const {
  if (left + right == 0) return std::nullopt;
  return 2.0 * static_cast<double>(shared) / static_cast<double>(left + right);
}

double LinkCounts::f1_or_one() const { return f1().value_or(1.0); }

IaaReport iaa_report(const std::string& language, const AnnotationSet& a, const AnnotationSet& b) {
  if (auto missing = coverage_difference(a, b); !missing.empty()) {
    throw CoverageMismatchError(std::move(missing));
  }
  IaaReport report;
  report.language = language;
  report.annotator1 = a.annotator;
  report.annotator2 = b.annotator;
  LinkCounts pooled;
  double sum = 0.0;
  for (const auto& [id, ann] : a.poems) {
    const auto la = chains_to_links(ann);
    const auto lb = chains_to_links(b.poems.at(id));
    pooled.add(la, lb);
    const double f = f1_links(la, lb);
    sum += f;
    report.per_poem.emplace_back(id, f);
  }
  report.micro_f1 = pooled.f1_or_one();
  report.macro_f1 = report.per_poem.empty() ? 1.0 : sum / static_cast<double>(report.per_poem.size());
  return report;
}

void write_iaa_csv(std::ostream& out, const std::vector<IaaReport>& reports) {
  out << "language,annotator1,annotator2,poems,f1_micro,f1_macro\n";
  for (const auto& r : reports) {
    out << fmt::format("{},{},{},{},{:.4f},{:.4f}\n", r.language, r.annotator1, r.annotator2,
                       r.per_poem.size(), r.micro_f1, r.macro_f1);
  }
}

void write_iaa_per_poem_csv(std::ostream& out, const std::vector<IaaReport>& reports) {
  out << "language,poem_id,f1\n";
  for (const auto& r : reports) {
    for (const auto& [id, f] : r.per_poem) out << fmt::format("{},{},{:.4f}\n", r.language, id, f);
  }
}

AgreementDataset consecutive_pairs_dataset(const AnnotationSet& a, const AnnotationSet& b,
                                           const Corpus& corpus, const Transcriber& transcriber,
                                           bool normalize) {
  if (auto missing = coverage_difference(a, b); !missing.empty()) {
    throw CoverageMismatchError(std::move(missing));
  }
  AgreementDataset out;
  out.normalized = normalize;
  for (const auto& [id, ann_a] : a.poems) {
    const Poem* poem = corpus.find(id);
    if (!poem) throw ValidationError("annotated poem " + id + " is not in the corpus");
    const auto& ann_b = b.poems.at(id);
    validate(ann_a, poem->size());
    validate(ann_b, poem->size());
    const auto links_a = chains_to_links(ann_a);
    const auto links_b = chains_to_links(ann_b);

    std::set<Link> pairs;
    for (const auto* chains : {&ann_a.chains, &ann_b.chains}) {
      for (const auto& chain : *chains) {
        for (std::size_t k = 0; k + 1 < chain.size(); ++k) pairs.emplace(chain[k], chain[k + 1]);
      }
    }
    for (const auto& [i, j] : pairs) {
      double distance = 0.0;
      try {
        const auto ti = transcriber.transcribe(poem->lines[i].text, poem->language);
        const auto tj = transcriber.transcribe(poem->lines[j].text, poem->language);
        distance = segment_distance(extract_rhyme_segment(*ti), extract_rhyme_segment(*tj),
                                    normalize);
      } catch (const Error& e) {
        spdlog::warn("poem {} lines {}-{} skipped: {}", id, i, j, e.what());
        ++out.skipped;
        continue;
      }
      const Link link{i, j};
      out.rows.push_back({links_a.links.contains(link) && links_b.links.contains(link), j - i,
                          distance, corpus.language()});
    }
  }
  return out;
}

void write_agreement_csv(std::ostream& out, const std::vector<AgreementRow>& rows) {
  out << kAgreementHeader << '\n';
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{}\n", r.agreement ? 1 : 0, r.line_distance, r.phon_distance,
                       r.corpus);
  }
}

std::vector<AgreementRow> read_agreement_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("agreement CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kAgreementHeader) {
    throw SchemaError("agreement CSV header must be '" + std::string(kAgreementHeader) + "'");
  }
  std::vector<AgreementRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const auto where = "agreement CSV line " + std::to_string(line_no);
    if (fields.size() != 4) throw SchemaError(where + ": expected 4 fields");
    AgreementRow row;
    const std::string flag = text::to_lower(fields[0]);
    if (flag == "1" || flag == "true") {
      row.agreement = true;
    } else if (flag == "0" || flag == "false") {
      row.agreement = false;
    } else {
      throw SchemaError(where + ": bad agreement value '" + fields[0] + "'");
    }
    try {
      std::size_t used = 0;
      const long long d = std::stoll(fields[1], &used);
      if (used != fields[1].size() || d < 1) throw std::invalid_argument("line_distance");
      row.line_distance = static_cast<std::size_t>(d);
      row.phon_distance = std::stod(fields[2], &used);
      if (used != fields[2].size() || !(row.phon_distance >= 0.0)) {
        throw std::invalid_argument("phon_distance");
      }
    } catch (const std::exception&) {
      throw SchemaError(where + ": line_distance must be an integer >= 1 and phon_distance a "
                                "non-negative number");
    }
    if (fields[3].empty()) throw SchemaError(where + ": corpus is empty");
    row.corpus = fields[3];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AgreementRow> load_agreement_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_agreement_csv(in);
}

}  // namespace rhyme
