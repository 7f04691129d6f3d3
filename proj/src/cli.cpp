#include "rhyme/cli.hpp"

#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <set>
#include <ostream>
#include <sstream>

#include "rhyme/corpus.hpp"
#include "rhyme/error.hpp"
#include "rhyme/evaluation.hpp"
#include "rhyme/llm.hpp"
#include "rhyme/regression.hpp"
#include "rhyme/server.hpp"
#include "rhyme/sweep.hpp"
#include "rhyme/tagger.hpp"
#include "rhyme/transcriber.hpp"

namespace rhyme {
namespace {

struct PhoneticsOptions {
  std::string lexicon;
  std::string g2p;
  std::string features;
};

struct Phonetics {
  std::unique_ptr<FeatureTable> owned_table;
  std::unique_ptr<Transcriber> transcriber;
};

Phonetics make_phonetics(const PhoneticsOptions& o) {
  Phonetics p;
  const FeatureTable* table = &FeatureTable::shipped();
  if (!o.features.empty()) {
    p.owned_table = std::make_unique<FeatureTable>(FeatureTable::load(o.features));
    table = p.owned_table.get();
  }
  std::shared_ptr<const IpaBackend> backend;
  if (!o.lexicon.empty() && !o.g2p.empty()) {
    throw ValidationError("use either --lexicon or --g2p, not both");
  }
  if (!o.lexicon.empty()) {
    backend = std::make_shared<LexiconBackend>(LexiconBackend::load(o.lexicon));
  } else if (!o.g2p.empty()) {
    backend = std::make_shared<ProcessBackend>(ProcessBackend::from_command_line(o.g2p));
  } else {
    throw ValidationError("a transcriber is required: --lexicon FILE or --g2p COMMAND");
  }
  p.transcriber = std::make_unique<Transcriber>(std::move(backend), *table);
  return p;
}

void add_phonetics(CLI::App* cmd, PhoneticsOptions& o) {
  cmd->add_option("--lexicon", o.lexicon, "word<TAB>ipa lookup file")->check(CLI::ExistingFile);
  cmd->add_option("--g2p", o.g2p,
                  "external transcriber command; {lang} is replaced, text is appended "
                  "(e.g. \"espeak-ng -q --ipa=3 -v {lang}\")");
  cmd->add_option("--features", o.features, "feature table CSV (default: shipped table)")
      ->check(CLI::ExistingFile);
}

void add_tagger(CLI::App* cmd, TaggerConfig& c) {
  cmd->add_option("--window", c.window, "max line distance for candidate pairs")
      ->capture_default_str();
  cmd->add_option("--tau", c.tau, "acceptance threshold")->capture_default_str();
  cmd->add_option("--alpha", c.alpha, "Laplace smoothing")->capture_default_str();
  cmd->add_option("--t-min", c.t_min, "T-score threshold for seed pairs")->capture_default_str();
  cmd->add_option("--min-count", c.min_count, "minimum seed pair count")->capture_default_str();
  cmd->add_option("--max-iter", c.max_iter, "training iterations cap")->capture_default_str();
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path);
  f << content;
  if (!f) throw Error("failed writing " + path);
}

std::vector<AnnotationSet> load_gold(const std::vector<std::string>& dirs) {
  std::vector<AnnotationSet> out;
  for (const auto& d : dirs) out.push_back(load_annotation_dir(d));
  return out;
}

std::atomic<AnnotationServer*> g_server{nullptr};

extern "C" void handle_stop_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised rhyme recognition toolkit", "rhyme"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  int jobs = 0;
  std::string log_level = "warn";
  app.add_option("--jobs,-j", jobs, "worker threads (default: all cores)");
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->capture_default_str();

  // ingest
  std::string ingest_in, ingest_out, ingest_lang;
  auto* ingest = app.add_subcommand("ingest", "validate a corpus and write it as JSON");
  ingest->add_option("--input", ingest_in, "corpus JSON or directory of .txt poems")
      ->required();
  ingest->add_option("--language", ingest_lang, "ISO 639-1 code (required for directories)");
  ingest->add_option("--out", ingest_out, "output corpus JSON (default: stdout)");

  // train
  std::string train_corpus, train_out;
  std::size_t train_lines = 0;
  std::uint64_t train_seed = 0;
  TaggerConfig train_cfg;
  PhoneticsOptions train_ph;
  auto* train = app.add_subcommand("train", "learn a rhyme model from a corpus sample");
  train->add_option("--corpus", train_corpus)->required()->check(CLI::ExistingPath);
  train->add_option("--out", train_out, "model JSON (default: stdout)");
  train->add_option("--lines", train_lines, "sample size in lines; 0 uses the whole corpus")
      ->capture_default_str();
  train->add_option("--seed", train_seed)->capture_default_str();
  add_tagger(train, train_cfg);
  add_phonetics(train, train_ph);

  // tag
  std::string tag_model, tag_corpus, tag_out, tag_ann_dir, tag_annotator = "rhymetagger";
  PhoneticsOptions tag_ph;
  auto* tag = app.add_subcommand("tag", "tag rhyme chains in every poem of a corpus");
  tag->add_option("--model", tag_model)->required()->check(CLI::ExistingFile);
  tag->add_option("--corpus", tag_corpus)->required()->check(CLI::ExistingPath);
  tag->add_option("--out", tag_out, "JSON list of {poem_id, chains} (default: stdout)");
  tag->add_option("--annotations-out", tag_ann_dir,
                  "also write one annotation file per poem into this directory");
  tag->add_option("--annotator", tag_annotator, "annotator id for --annotations-out")
      ->capture_default_str();
  add_phonetics(tag, tag_ph);

  // iaa
  std::vector<std::string> iaa_dirs;
  std::string iaa_lang = "all", iaa_out, iaa_per_poem;
  auto* iaa = app.add_subcommand("iaa", "inter-annotator agreement (chain-link F1)");
  iaa->add_option("--ann-dir", iaa_dirs, "annotation directory; give exactly two")
      ->required()
      ->expected(2)
      ->check(CLI::ExistingDirectory);
  iaa->add_option("--language", iaa_lang, "label for the language column")->capture_default_str();
  iaa->add_option("--out", iaa_out, "CSV (default: stdout)");
  iaa->add_option("--per-poem", iaa_per_poem, "per-poem F1 CSV");

  // agreement-data
  std::vector<std::string> agr_dirs;
  std::string agr_corpus, agr_out;
  bool agr_normalize = false;
  PhoneticsOptions agr_ph;
  auto* agr = app.add_subcommand("agreement-data", "build the regression dataset");
  agr->add_option("--ann-dir", agr_dirs, "annotation directory; give exactly two")
      ->required()
      ->expected(2)
      ->check(CLI::ExistingDirectory);
  agr->add_option("--corpus", agr_corpus)->required()->check(CLI::ExistingPath);
  agr->add_option("--out", agr_out, "rows CSV; metadata goes to <out>.meta.json")->required();
  agr->add_flag("--normalize", agr_normalize, "divide phonetic distance by segment length");
  add_phonetics(agr, agr_ph);

  // regress
  std::vector<std::string> reg_data;
  std::string reg_out;
  LogitModelConfig reg_cfg;
  auto* reg = app.add_subcommand("regress", "fit the hierarchical logistic agreement model");
  reg->add_option("--data", reg_data, "agreement CSV file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  reg->add_option("--out", reg_out, "summary CSV; metadata goes to <out>.meta.json")->required();
  reg->add_option("--chains", reg_cfg.chains)->capture_default_str();
  reg->add_option("--draws", reg_cfg.draws, "iterations per chain including warmup")
      ->capture_default_str();
  reg->add_option("--warmup", reg_cfg.warmup)->capture_default_str();
  reg->add_option("--hdi-mass", reg_cfg.hdi_mass)->capture_default_str();
  reg->add_option("--seed", reg_cfg.seed)->capture_default_str();
  reg->add_option("--prior-beta-sd", reg_cfg.prior_beta_sd)->capture_default_str();
  reg->add_option("--prior-mu-sd", reg_cfg.prior_mu_alpha_sd)->capture_default_str();
  reg->add_option("--prior-sigma-scale", reg_cfg.prior_sigma_alpha_scale)->capture_default_str();

  // sweep
  std::string sw_corpus, sw_out, sw_sizes;
  std::vector<std::string> sw_gold;
  SweepConfig sw_cfg;
  PhoneticsOptions sw_ph;
  auto* sweep = app.add_subcommand("sweep", "train many models per sample size and score them");
  sweep->add_option("--corpus", sw_corpus)->required()->check(CLI::ExistingPath);
  sweep->add_option("--gold", sw_gold, "gold annotation directory (one or two)")
      ->required()
      ->expected(1, 2)
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--sizes", sw_sizes, "comma list, k/M suffixes allowed (default: 1k..1M)");
  sweep->add_option("--samples", sw_cfg.samples, "models per size")->capture_default_str();
  sweep->add_option("--seed", sw_cfg.seed)->capture_default_str();
  sweep->add_option("--out", sw_out, "CSV (default: stdout)");
  sweep->add_flag("--exclude-gold", sw_cfg.exclude_gold, "never sample annotated poems");
  add_tagger(sweep, sw_cfg.tagger);
  add_phonetics(sweep, sw_ph);

  // llm
  std::string llm_provider, llm_corpus, llm_archive, llm_replay, llm_out;
  std::vector<std::string> llm_gold;
  std::size_t llm_concurrency = 2;
  auto* llm = app.add_subcommand("llm", "benchmark a chat LLM on the gold poems");
  llm->add_option("--provider", llm_provider, "provider config JSON")->check(CLI::ExistingFile);
  llm->add_option("--replay", llm_replay, "re-score archived responses instead of calling")
      ->check(CLI::ExistingDirectory);
  llm->add_option("--corpus", llm_corpus)->required()->check(CLI::ExistingPath);
  llm->add_option("--gold", llm_gold, "gold annotation directory (one or two)")
      ->required()
      ->expected(1, 2)
      ->check(CLI::ExistingDirectory);
  llm->add_option("--archive", llm_archive, "directory for raw responses")->capture_default_str();
  llm->add_option("--concurrency", llm_concurrency)->capture_default_str();
  llm->add_option("--out", llm_out, "report CSV (default: stdout)");

  // serve
  std::string sv_corpus, sv_ann, sv_static, sv_host = "127.0.0.1";
  int sv_port = 8080;
  auto* serve = app.add_subcommand("serve", "HTTP API for the annotation UI");
  serve->add_option("--corpus", sv_corpus)->required()->check(CLI::ExistingPath);
  serve->add_option("--annotations", sv_ann, "annotation store directory")->required();
  serve->add_option("--static", sv_static, "UI bundle served at /")
      ->check(CLI::ExistingDirectory);
  serve->add_option("--host", sv_host)->capture_default_str();
  serve->add_option("--port", sv_port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  {
    static const auto logger = spdlog::stderr_color_mt("rhyme");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(log_level));
  }
  if (jobs > 0) omp_set_num_threads(jobs);

  try {
    if (*ingest) {
      std::optional<std::string> lang;
      if (!ingest_lang.empty()) lang = ingest_lang;
      const auto corpus = load_corpus(ingest_in, lang);
      emit(ingest_out, corpus_to_json(corpus).dump(1) + "\n", out);
      err << corpus.poems().size() << " poems, " << corpus.line_count() << " lines ("
          << corpus.language() << ")\n";
    } else if (*train) {
      validate(train_cfg);
      const auto corpus = load_corpus(train_corpus);
      const auto ph = make_phonetics(train_ph);
      const auto sample =
          train_lines == 0 ? whole_corpus(corpus) : sample_poems(corpus, train_lines, train_seed);
      const auto model = train_model(sample, *ph.transcriber, train_cfg);
      emit(train_out, model.to_json().dump(1) + "\n", out);
      err << "trained on " << sample.line_count() << " lines, " << model.iterations_run()
          << " iterations, " << model.entry_count() << " table entries\n";
    } else if (*tag) {
      const auto model = load_model(tag_model);
      const auto corpus = load_corpus(tag_corpus);
      const auto ph = make_phonetics(tag_ph);
      if (!is_valid_annotator_id(tag_annotator)) throw ValidationError("bad --annotator");
      std::vector<const Poem*> poems;
      for (const auto& p : corpus.poems()) poems.push_back(&p);
      const auto tagged = tag_poems(model, poems, *ph.transcriber);
      nlohmann::json doc = nlohmann::json::array();
      for (const auto& t : tagged) doc.push_back({{"poem_id", t.poem_id}, {"chains", t.chains}});
      emit(tag_out, doc.dump(1) + "\n", out);
      if (!tag_ann_dir.empty()) {
        std::filesystem::create_directories(tag_ann_dir);
        for (const auto& t : tagged) {
          save_annotation({tag_annotator, t.poem_id, t.chains},
                          std::filesystem::path(tag_ann_dir) / (t.poem_id + ".json"));
        }
      }
    } else if (*iaa) {
      const auto a = load_annotation_dir(iaa_dirs[0]);
      const auto b = load_annotation_dir(iaa_dirs[1]);
      const std::vector<IaaReport> reports{iaa_report(iaa_lang, a, b)};
      std::ostringstream csv;
      write_iaa_csv(csv, reports);
      emit(iaa_out, csv.str(), out);
      if (!iaa_per_poem.empty()) {
        std::ostringstream per;
        write_iaa_per_poem_csv(per, reports);
        emit(iaa_per_poem, per.str(), out);
      }
    } else if (*agr) {
      const auto a = load_annotation_dir(agr_dirs[0]);
      const auto b = load_annotation_dir(agr_dirs[1]);
      const auto corpus = load_corpus(agr_corpus);
      const auto ph = make_phonetics(agr_ph);
      const auto data = consecutive_pairs_dataset(a, b, corpus, *ph.transcriber, agr_normalize);
      std::ostringstream csv;
      write_agreement_csv(csv, data.rows);
      emit(agr_out, csv.str(), out);
      const nlohmann::json meta = {{"rows", data.rows.size()},
                                   {"skipped", data.skipped},
                                   {"phon_distance_normalized", data.normalized},
                                   {"line_distance", "j - i (lines apart)"},
                                   {"annotators", {a.annotator, b.annotator}},
                                   {"language", corpus.language()}};
      emit(agr_out + ".meta.json", meta.dump(1) + "\n", out);
      if (data.skipped > 0) err << data.skipped << " pair(s) skipped, see warnings\n";
    } else if (*reg) {
      validate(reg_cfg);
      std::vector<AgreementRow> rows;
      nlohmann::json sources = nlohmann::json::array();
      for (const auto& path : reg_data) {
        auto part = load_agreement_csv(path);
        rows.insert(rows.end(), part.begin(), part.end());
        nlohmann::json src = {{"path", path}};
        std::ifstream meta_in(path + ".meta.json");
        if (meta_in) {
          const auto meta = nlohmann::json::parse(meta_in, nullptr, false);
          if (!meta.is_discarded() && meta.contains("phon_distance_normalized")) {
            src["phon_distance_normalized"] = meta["phon_distance_normalized"];
          }
        }
        sources.push_back(std::move(src));
      }
      const auto summary = fit_hierarchical_logit(rows, reg_cfg);
      std::ostringstream csv;
      write_summary_csv(csv, summary);
      emit(reg_out, csv.str(), out);
      auto meta = summary_metadata(summary, reg_cfg);
      meta["sources"] = std::move(sources);
      emit(reg_out + ".meta.json", meta.dump(1) + "\n", out);
      for (const auto& w : summary.warnings) err << "warning: " << w << "\n";
    } else if (*sweep) {
      if (!sw_sizes.empty()) sw_cfg.sizes = parse_size_list(sw_sizes);
      const auto corpus = load_corpus(sw_corpus);
      const auto gold = load_gold(sw_gold);
      const auto ph = make_phonetics(sw_ph);
      const auto result = run_sweep(corpus, gold, *ph.transcriber, sw_cfg);
      std::ostringstream csv;
      write_sweep_csv(csv, result.rows);
      emit(sw_out, csv.str(), out);
      for (auto size : result.skipped_sizes) {
        err << "size " << size << " skipped: corpus has " << corpus.line_count() << " lines\n";
      }
    } else if (*llm) {
      if (llm_provider.empty() == llm_replay.empty()) {
        throw ValidationError("give exactly one of --provider or --replay");
      }
      const auto corpus = load_corpus(llm_corpus);
      const auto gold = load_gold(llm_gold);
      std::set<std::string> ids;
      for (const auto& g : gold)
        for (const auto& [id, ann] : g.poems) ids.insert(id);
      std::vector<const Poem*> poems;
      for (const auto& id : ids) {
        const Poem* p = corpus.find(id);
        if (!p) throw ValidationError("gold poem " + id + " is not in the corpus");
        poems.push_back(p);
      }
      BenchmarkOptions opts;
      opts.language = corpus.language();
      opts.concurrency = llm_concurrency;
      std::unique_ptr<ChatProvider> provider;
      if (!llm_provider.empty()) {
        const auto cfg = load_provider_config(llm_provider);
        opts.max_retries = cfg.max_retries;
        opts.rate_limit_rpm = cfg.rate_limit_rpm;
        opts.archive_dir = llm_archive.empty() ? std::filesystem::path("llm_archive")
                                               : std::filesystem::path(llm_archive);
        provider = std::make_unique<HttpChatProvider>(cfg);
      } else {
        opts.max_retries = 0;
        if (!llm_archive.empty()) opts.archive_dir = llm_archive;
        provider = std::make_unique<ReplayProvider>(llm_replay);
      }
      const auto report = run_benchmark(*provider, poems, gold, opts);
      std::ostringstream csv;
      write_report_csv(csv, {report});
      emit(llm_out, csv.str(), out);
      err << report.failed << " of " << poems.size() << " poem(s) failed\n";
    } else if (*serve) {
      const auto corpus = load_corpus(sv_corpus);
      ServerOptions opts;
      opts.annotations_dir = sv_ann;
      if (!sv_static.empty()) opts.static_dir = sv_static;
      if (const char* token = std::getenv("RHYME_SERVE_TOKEN"); token && *token) {
        opts.bearer_token = token;
      }
      AnnotationServer server(corpus, opts);
      const int port = server.bind(sv_host, sv_port);
      out << "listening on http://" << sv_host << ":" << port << std::endl;
      g_server = &server;
      std::signal(SIGINT, handle_stop_signal);
      std::signal(SIGTERM, handle_stop_signal);
      server.run();
      g_server = nullptr;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace rhyme
