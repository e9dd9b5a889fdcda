#include "topictraj/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "topictraj/align.hpp"
#include "topictraj/csv.hpp"
#include "topictraj/rng.hpp"
#include "topictraj/svg.hpp"
#include "topictraj/version.hpp"
#include "topictraj/wordselect.hpp"

namespace topictraj {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> order = {Stage::ingest, Stage::embed,  Stage::btm,
                                           Stage::select, Stage::lsirm,  Stage::align,
                                           Stage::render};
  return order;
}

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::embed: return "embed";
    case Stage::btm: return "btm";
    case Stage::select: return "select";
    case Stage::lsirm: return "lsirm";
    case Stage::align: return "align";
    case Stage::render: return "render";
  }
  throw std::logic_error("unknown stage");
}

std::optional<Stage> parse_stage(const std::string& name) {
  for (Stage s : all_stages())
    if (stage_name(s) == name) return s;
  return std::nullopt;
}

std::string hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

static std::string hash_string(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

// ---------------------------------------------------------------------------
// Configuration

static fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("bad config JSON in " + path.string() + ": " + e.what());
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  PipelineConfig cfg;
  if (j.contains("input")) cfg.input = resolve(base, j.at("input").get<std::string>());
  if (j.contains("stoplist")) cfg.stoplist = resolve(base, j.at("stoplist").get<std::string>());
  if (j.contains("topic_labels"))
    cfg.topic_labels = resolve(base, j.at("topic_labels").get<std::string>());
  if (j.contains("output_dir")) cfg.output_dir = resolve(base, j.at("output_dir").get<std::string>());
  if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<std::size_t>();

  if (j.contains("corpus")) {
    const auto& c = j.at("corpus");
    if (c.contains("min_token_length"))
      cfg.filter.min_token_length = c.at("min_token_length").get<std::size_t>();
    if (c.contains("drop_tokens_with_digits"))
      cfg.filter.drop_tokens_with_digits = c.at("drop_tokens_with_digits").get<bool>();
  }
  if (j.contains("embedding")) {
    const auto& e = j.at("embedding");
    if (e.contains("dimension")) cfg.embedding.dimension = e.at("dimension").get<std::size_t>();
    if (e.contains("window")) cfg.embedding.window = e.at("window").get<std::size_t>();
    if (e.contains("negatives")) cfg.embedding.negatives = e.at("negatives").get<std::size_t>();
    if (e.contains("epochs")) cfg.embedding.epochs = e.at("epochs").get<std::size_t>();
    if (e.contains("learning_rate"))
      cfg.embedding.learning_rate = e.at("learning_rate").get<double>();
    if (e.contains("unigram_power"))
      cfg.embedding.unigram_power = e.at("unigram_power").get<double>();
    if (e.contains("expansion_k")) cfg.expansion_k = e.at("expansion_k").get<std::size_t>();
  }
  if (j.contains("btm")) {
    const auto& b = j.at("btm");
    if (b.contains("topics")) cfg.btm.topics = b.at("topics").get<std::size_t>();
    if (b.contains("alpha")) cfg.btm.alpha = b.at("alpha").get<double>();
    if (b.contains("beta")) cfg.btm.beta = b.at("beta").get<double>();
    if (b.contains("iterations")) cfg.btm.iterations = b.at("iterations").get<std::size_t>();
    if (b.contains("burn_in")) cfg.btm.burn_in = b.at("burn_in").get<std::size_t>();
    if (b.contains("thin")) cfg.btm.thin = b.at("thin").get<std::size_t>();
    if (b.contains("max_doc_tokens"))
      cfg.btm_max_doc_tokens = b.at("max_doc_tokens").get<std::size_t>();
    if (b.contains("save_retained_counts"))
      cfg.btm_save_retained_counts = b.at("save_retained_counts").get<bool>();
  }
  if (j.contains("wordselect")) {
    const auto& w = j.at("wordselect");
    if (w.contains("from_level")) cfg.wordselect.from_level = w.at("from_level").get<int>();
    if (w.contains("to_level")) cfg.wordselect.to_level = w.at("to_level").get<int>();
    if (w.contains("step")) cfg.wordselect.step = w.at("step").get<int>();
    if (w.contains("histogram_bins"))
      cfg.wordselect.histogram_bins = w.at("histogram_bins").get<std::size_t>();
    if (w.contains("logprob_cutoff"))
      cfg.wordselect.logprob_cutoff = w.at("logprob_cutoff").get<double>();
  }
  if (j.contains("lsirm")) {
    const auto& l = j.at("lsirm");
    if (l.contains("latent_dim")) cfg.lsirm.latent_dim = l.at("latent_dim").get<std::size_t>();
    if (l.contains("iterations")) cfg.lsirm.iterations = l.at("iterations").get<std::size_t>();
    if (l.contains("burn_in")) cfg.lsirm.burn_in = l.at("burn_in").get<std::size_t>();
    if (l.contains("thin")) cfg.lsirm.thin = l.at("thin").get<std::size_t>();
    if (l.contains("proposal_sd_beta"))
      cfg.lsirm.proposal_sd_beta = l.at("proposal_sd_beta").get<double>();
    if (l.contains("proposal_sd_theta"))
      cfg.lsirm.proposal_sd_theta = l.at("proposal_sd_theta").get<double>();
    if (l.contains("proposal_sd_position"))
      cfg.lsirm.proposal_sd_position = l.at("proposal_sd_position").get<double>();
    if (l.contains("tau2_beta")) cfg.lsirm.tau2_beta = l.at("tau2_beta").get<double>();
    if (l.contains("a_sigma")) cfg.lsirm.a_sigma = l.at("a_sigma").get<double>();
    if (l.contains("b_sigma")) cfg.lsirm.b_sigma = l.at("b_sigma").get<double>();
    if (l.contains("a_sigma_theta")) cfg.lsirm.a_sigma_theta = l.at("a_sigma_theta").get<double>();
    if (l.contains("b_sigma_theta")) cfg.lsirm.b_sigma_theta = l.at("b_sigma_theta").get<double>();
    if (l.contains("reference")) {
      const auto ref = l.at("reference").get<std::string>();
      if (ref == "highest_log_posterior")
        cfg.lsirm.procrustes_reference = LsirmConfig::Reference::highest_log_posterior;
      else if (ref == "last_sample")
        cfg.lsirm.procrustes_reference = LsirmConfig::Reference::last_sample;
      else
        throw std::runtime_error("unknown lsirm.reference: " + ref);
    }
  }
  if (j.contains("align")) {
    const auto& a = j.at("align");
    if (a.contains("oblimin_gamma")) cfg.align.oblimin_gamma = a.at("oblimin_gamma").get<double>();
    if (a.contains("tolerance")) cfg.align.tolerance = a.at("tolerance").get<double>();
    if (a.contains("max_iterations"))
      cfg.align.max_iterations = a.at("max_iterations").get<std::size_t>();
  }
  if (j.contains("render")) {
    const auto& r = j.at("render");
    if (r.contains("top_words")) cfg.render.top_words = r.at("top_words").get<std::size_t>();
  }
  return cfg;
}

static json config_to_json(const PipelineConfig& cfg) {
  json j;
  j["input"] = cfg.input.string();
  if (cfg.stoplist) j["stoplist"] = cfg.stoplist->string();
  if (cfg.topic_labels) j["topic_labels"] = cfg.topic_labels->string();
  j["output_dir"] = cfg.output_dir.string();
  j["master_seed"] = cfg.master_seed;
  j["threads"] = cfg.threads;
  j["corpus"] = {{"min_token_length", cfg.filter.min_token_length},
                 {"drop_tokens_with_digits", cfg.filter.drop_tokens_with_digits}};
  j["embedding"] = {{"dimension", cfg.embedding.dimension},
                    {"window", cfg.embedding.window},
                    {"negatives", cfg.embedding.negatives},
                    {"epochs", cfg.embedding.epochs},
                    {"learning_rate", cfg.embedding.learning_rate},
                    {"unigram_power", cfg.embedding.unigram_power},
                    {"expansion_k", cfg.expansion_k}};
  j["btm"] = {{"topics", cfg.btm.topics},
              {"alpha", cfg.btm.alpha},
              {"beta", cfg.btm.beta},
              {"iterations", cfg.btm.iterations},
              {"burn_in", cfg.btm.burn_in},
              {"thin", cfg.btm.thin},
              {"max_doc_tokens", cfg.btm_max_doc_tokens},
              {"save_retained_counts", cfg.btm_save_retained_counts}};
  j["wordselect"] = {{"from_level", cfg.wordselect.from_level},
                     {"to_level", cfg.wordselect.to_level},
                     {"step", cfg.wordselect.step},
                     {"histogram_bins", cfg.wordselect.histogram_bins},
                     {"logprob_cutoff", cfg.wordselect.logprob_cutoff}};
  j["lsirm"] = {{"latent_dim", cfg.lsirm.latent_dim},
                {"iterations", cfg.lsirm.iterations},
                {"burn_in", cfg.lsirm.burn_in},
                {"thin", cfg.lsirm.thin},
                {"proposal_sd_beta", cfg.lsirm.proposal_sd_beta},
                {"proposal_sd_theta", cfg.lsirm.proposal_sd_theta},
                {"proposal_sd_position", cfg.lsirm.proposal_sd_position},
                {"tau2_beta", cfg.lsirm.tau2_beta},
                {"a_sigma", cfg.lsirm.a_sigma},
                {"b_sigma", cfg.lsirm.b_sigma},
                {"a_sigma_theta", cfg.lsirm.a_sigma_theta},
                {"b_sigma_theta", cfg.lsirm.b_sigma_theta},
                {"reference",
                 cfg.lsirm.procrustes_reference == LsirmConfig::Reference::highest_log_posterior
                     ? "highest_log_posterior"
                     : "last_sample"}};
  j["align"] = {{"oblimin_gamma", cfg.align.oblimin_gamma},
                {"tolerance", cfg.align.tolerance},
                {"max_iterations", cfg.align.max_iterations}};
  j["render"] = {{"top_words", cfg.render.top_words}};
  return j;
}

void PipelineConfig::save(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config " + path.string());
  out << config_to_json(*this).dump(2) << '\n';
}

void PipelineConfig::validate() const {
  embedding.validate();
  btm.validate();
  lsirm.validate();
  if (wordselect.from_level <= wordselect.to_level)
    throw std::invalid_argument("wordselect.from_level must exceed to_level");
  if (wordselect.step < 1) throw std::invalid_argument("wordselect.step must be >= 1");
  if (render.top_words == 0) throw std::invalid_argument("render.top_words must be >= 1");
}

// ---------------------------------------------------------------------------
// Manifest

RunManifest RunManifest::load(const fs::path& path) {
  RunManifest manifest;
  std::ifstream in(path);
  if (!in) return manifest;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return manifest;
  manifest.version = j.value("version", "");
  if (j.contains("stages") && j["stages"].is_object()) {
    for (const auto& [name, rec] : j["stages"].items()) {
      StageRecord record;
      record.config_fingerprint = rec.value("config", "");
      record.seed = rec.value("seed", std::uint64_t{0});
      record.timestamp = rec.value("timestamp", "");
      if (rec.contains("inputs"))
        for (const auto& [p, h] : rec["inputs"].items())
          record.input_hashes[p] = h.get<std::string>();
      if (rec.contains("outputs"))
        for (const auto& [p, h] : rec["outputs"].items())
          record.output_hashes[p] = h.get<std::string>();
      manifest.stages[name] = std::move(record);
    }
  }
  return manifest;
}

void RunManifest::save(const fs::path& path) const {
  json j;
  j["version"] = version;
  j["stages"] = json::object();
  for (const auto& [name, record] : stages) {
    json rec;
    rec["config"] = record.config_fingerprint;
    rec["seed"] = record.seed;
    rec["timestamp"] = record.timestamp;
    rec["inputs"] = json::object();
    for (const auto& [p, h] : record.input_hashes) rec["inputs"][p] = h;
    rec["outputs"] = json::object();
    for (const auto& [p, h] : record.output_hashes) rec["outputs"][p] = h;
    j["stages"][name] = std::move(rec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Stage execution

namespace {

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct StagePlan {
  Stage stage;
  std::string fingerprint;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::uint64_t seed = 0;
};

std::vector<int> selection_levels(const WordselectConfig& w) {
  std::vector<int> levels;
  for (int level = w.from_level; level >= w.to_level; level -= w.step) levels.push_back(level);
  return levels;
}

std::vector<std::string> load_labels(const std::optional<fs::path>& path) {
  std::vector<std::string> labels;
  if (!path) return labels;
  std::ifstream in(*path);
  if (!in) throw std::runtime_error("cannot open topic labels " + path->string());
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(line);
  }
  return labels;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

class PipelineRun {
 public:
  PipelineRun(const PipelineConfig& cfg) : cfg_(cfg), out_(cfg.output_dir) {}

  StagePlan plan(Stage stage) const {
    StagePlan p;
    p.stage = stage;
    const auto levels = selection_levels(cfg_.wordselect);
    json fp;
    switch (stage) {
      case Stage::ingest: {
        fp["corpus"] = {{"min_token_length", cfg_.filter.min_token_length},
                        {"drop_tokens_with_digits", cfg_.filter.drop_tokens_with_digits}};
        p.inputs = {cfg_.input};
        if (cfg_.stoplist) p.inputs.push_back(*cfg_.stoplist);
        p.outputs = {out_ / "corpus_tokens.txt", out_ / "corpus_vocabulary.txt",
                     out_ / "keywords.txt", out_ / "ingest_stats.json"};
        break;
      }
      case Stage::embed: {
        fp["embedding"] = {{"dimension", cfg_.embedding.dimension},
                           {"window", cfg_.embedding.window},
                           {"negatives", cfg_.embedding.negatives},
                           {"epochs", cfg_.embedding.epochs},
                           {"learning_rate", cfg_.embedding.learning_rate},
                           {"unigram_power", cfg_.embedding.unigram_power},
                           {"expansion_k", cfg_.expansion_k}};
        p.seed = Rng::mix(cfg_.master_seed, 1);
        p.inputs = {out_ / "corpus_tokens.txt", out_ / "keywords.txt"};
        p.outputs = {out_ / "embeddings.txt", out_ / "expanded_vocabulary.txt",
                     out_ / "skipped_keywords.txt"};
        break;
      }
      case Stage::btm: {
        fp["btm"] = {{"topics", cfg_.btm.topics},
                     {"alpha", cfg_.btm.alpha},
                     {"beta", cfg_.btm.beta},
                     {"iterations", cfg_.btm.iterations},
                     {"burn_in", cfg_.btm.burn_in},
                     {"thin", cfg_.btm.thin},
                     {"max_doc_tokens", cfg_.btm_max_doc_tokens},
                     {"save_retained_counts", cfg_.btm_save_retained_counts}};
        p.seed = Rng::mix(cfg_.master_seed, 2);
        p.inputs = {out_ / "corpus_tokens.txt", out_ / "expanded_vocabulary.txt"};
        p.outputs = {out_ / "topic_word_matrix.csv", out_ / "topic_distribution.csv"};
        if (cfg_.btm_save_retained_counts) p.outputs.push_back(out_ / "btm_retained_counts.csv");
        break;
      }
      case Stage::select: {
        fp["wordselect"] = {{"from_level", cfg_.wordselect.from_level},
                            {"to_level", cfg_.wordselect.to_level},
                            {"step", cfg_.wordselect.step},
                            {"histogram_bins", cfg_.wordselect.histogram_bins},
                            {"logprob_cutoff", cfg_.wordselect.logprob_cutoff}};
        p.inputs = {out_ / "topic_word_matrix.csv"};
        p.outputs = {out_ / "word_scores.csv", out_ / "logprob_histograms.csv"};
        for (int level : levels) p.outputs.push_back(out_ / ("X_" + std::to_string(level) + ".csv"));
        break;
      }
      case Stage::lsirm: {
        fp["lsirm"] = {{"latent_dim", cfg_.lsirm.latent_dim},
                       {"iterations", cfg_.lsirm.iterations},
                       {"burn_in", cfg_.lsirm.burn_in},
                       {"thin", cfg_.lsirm.thin},
                       {"proposal_sd_beta", cfg_.lsirm.proposal_sd_beta},
                       {"proposal_sd_theta", cfg_.lsirm.proposal_sd_theta},
                       {"proposal_sd_position", cfg_.lsirm.proposal_sd_position},
                       {"tau2_beta", cfg_.lsirm.tau2_beta},
                       {"a_sigma", cfg_.lsirm.a_sigma},
                       {"b_sigma", cfg_.lsirm.b_sigma},
                       {"a_sigma_theta", cfg_.lsirm.a_sigma_theta},
                       {"b_sigma_theta", cfg_.lsirm.b_sigma_theta},
                       {"reference", cfg_.lsirm.procrustes_reference ==
                                             LsirmConfig::Reference::highest_log_posterior
                                         ? "hlp"
                                         : "last"}};
        p.seed = cfg_.master_seed;
        for (int level : levels) p.inputs.push_back(out_ / ("X_" + std::to_string(level) + ".csv"));
        for (int level : levels) p.outputs.push_back(out_ / ("A_" + std::to_string(level) + ".csv"));
        for (int level : levels)
          p.outputs.push_back(out_ / ("lsirm_trace_" + std::to_string(level) + ".csv"));
        p.outputs.push_back(out_ / "lsirm_diagnostics.csv");
        break;
      }
      case Stage::align: {
        fp["align"] = {{"oblimin_gamma", cfg_.align.oblimin_gamma},
                       {"tolerance", cfg_.align.tolerance},
                       {"max_iterations", cfg_.align.max_iterations}};
        for (int level : levels) p.inputs.push_back(out_ / ("A_" + std::to_string(level) + ".csv"));
        p.outputs = {out_ / "distance_profile.csv", out_ / "R.csv", out_ / "trajectories.csv"};
        for (int level : levels) {
          p.outputs.push_back(out_ / ("Astar_" + std::to_string(level) + ".csv"));
          p.outputs.push_back(out_ / ("B_" + std::to_string(level) + ".csv"));
        }
        break;
      }
      case Stage::render: {
        fp["render"] = {{"top_words", cfg_.render.top_words}};
        p.inputs = {out_ / "distance_profile.csv", out_ / "trajectories.csv",
                    out_ / "topic_word_matrix.csv", out_ / "topic_distribution.csv"};
        if (cfg_.topic_labels) p.inputs.push_back(*cfg_.topic_labels);
        p.outputs = {out_ / "distance_plot.svg", out_ / "trajectory_plot.svg",
                     out_ / "topic_report.csv"};
        break;
      }
    }
    fp["seed"] = p.seed;
    p.fingerprint = hash_string(fp.dump());
    return p;
  }

  void execute(Stage stage, std::uint64_t seed) {
    switch (stage) {
      case Stage::ingest: return run_ingest();
      case Stage::embed: return run_embed(seed);
      case Stage::btm: return run_btm(seed);
      case Stage::select: return run_select();
      case Stage::lsirm: return run_lsirm(seed);
      case Stage::align: return run_align();
      case Stage::render: return run_render();
    }
  }

 private:
  void run_ingest() {
    IngestResult result = ingest_documents(cfg_.input);
    for (const auto& w : result.stats.warnings)
      std::cerr << "[stage ingest] warning: " << w << '\n';
    std::cerr << "[stage ingest] " << result.documents.documents.size() << " documents kept, "
              << result.stats.dropped_no_abstract << " dropped (no abstract), "
              << result.stats.skipped_malformed << " malformed, "
              << result.stats.skipped_duplicate_id << " duplicate ids\n";
    FilterConfig filter = cfg_.filter;
    if (cfg_.stoplist)
      for (const auto& w : load_stoplist(*cfg_.stoplist)) filter.stopwords.insert(w);
    const TokenizedCorpus corpus = build_tokenized_corpus(result.documents, filter);
    save_tokenized_corpus(out_ / "corpus_tokens.txt", corpus);
    save_vocabulary(out_ / "corpus_vocabulary.txt", corpus.vocabulary);
    const auto keywords = collect_keywords(result.documents, filter);
    std::ofstream kw(out_ / "keywords.txt", std::ios::binary);
    for (const auto& k : keywords) kw << k << '\n';
    json stats = {{"documents_kept", result.documents.documents.size()},
                  {"dropped_no_abstract", result.stats.dropped_no_abstract},
                  {"skipped_malformed", result.stats.skipped_malformed},
                  {"skipped_duplicate_id", result.stats.skipped_duplicate_id},
                  {"tokenized_documents", corpus.documents.size()},
                  {"vocabulary_size", corpus.vocabulary_size()},
                  {"keywords", keywords.size()}};
    write_text(out_ / "ingest_stats.json", stats.dump(2) + "\n");
  }

  void run_embed(std::uint64_t seed) {
    TokenizedCorpus corpus = load_tokenized_corpus(out_ / "corpus_tokens.txt");
    EmbeddingConfig ecfg = cfg_.embedding;
    ecfg.threads = cfg_.threads;
    const EmbeddingModel model = train_embeddings(corpus, ecfg, seed);
    save_embedding_model(out_ / "embeddings.txt", model, corpus.vocabulary);

    std::vector<std::string> keywords;
    {
      std::ifstream in(out_ / "keywords.txt");
      if (!in) throw std::runtime_error("cannot open keywords.txt");
      std::string line;
      while (std::getline(in, line)) {
        while (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) keywords.push_back(line);
      }
    }
    const ExpansionResult expansion =
        expand_vocabulary(model, corpus.vocabulary, keywords, cfg_.expansion_k);
    for (const auto& k : expansion.skipped_keywords)
      std::cerr << "[stage embed] warning: keyword '" << k
                << "' absent from embedding vocabulary, skipped\n";
    if (expansion.vocabulary.size() == 0)
      throw std::runtime_error("no keyword is present in the embedding vocabulary");
    save_vocabulary(out_ / "expanded_vocabulary.txt", expansion.vocabulary);
    std::ofstream skipped(out_ / "skipped_keywords.txt", std::ios::binary);
    for (const auto& k : expansion.skipped_keywords) skipped << k << '\n';
  }

  void run_btm(std::uint64_t seed) {
    const TokenizedCorpus corpus = load_tokenized_corpus(out_ / "corpus_tokens.txt");
    const Vocabulary expanded = load_vocabulary(out_ / "expanded_vocabulary.txt");
    const TokenizedCorpus restricted = restrict_to_vocabulary(corpus, expanded);
    const BitermSet biterms = extract_biterms(restricted, cfg_.btm_max_doc_tokens);
    std::cerr << "[stage btm] " << biterms.biterms.size() << " distinct biterms, "
              << biterms.total_instances << " instances over vocabulary of "
              << expanded.size() << "\n";
    BtmConfig bcfg = cfg_.btm;
    bcfg.seed = seed;
    const BtmResult result = run_btm_gibbs(biterms, bcfg);
    auto [phi, theta] = estimate_distributions(result.retained, bcfg, biterms.total_instances,
                                               expanded.tokens());
    save_topic_word_matrix(out_ / "topic_word_matrix.csv", phi);
    save_topic_distribution(out_ / "topic_distribution.csv", theta);
    if (cfg_.btm_save_retained_counts)
      save_retained_counts(out_ / "btm_retained_counts.csv", result.retained);
  }

  void run_select() {
    const TopicWordMatrix matrix = load_topic_word_matrix(out_ / "topic_word_matrix.csv");
    const auto scores = row_statistics(matrix);
    save_word_scores(out_ / "word_scores.csv", scores, matrix.words);
    const MatrixSequence seq = generate_matrix_sequence(
        matrix, cfg_.wordselect.from_level, cfg_.wordselect.to_level, cfg_.wordselect.step);
    for (std::size_t i = 0; i < seq.levels.size(); ++i)
      save_topic_word_matrix(out_ / ("X_" + std::to_string(seq.levels[i]) + ".csv"),
                             seq.matrices[i]);
    const auto histograms =
        logprob_histogram(matrix, cfg_.wordselect.histogram_bins, cfg_.wordselect.logprob_cutoff);
    save_histograms(out_ / "logprob_histograms.csv", histograms);
  }

  void run_lsirm(std::uint64_t master_seed) {
    const auto levels = selection_levels(cfg_.wordselect);
    struct LevelDiag {
      int level;
      LsirmAcceptance acceptance;
      std::size_t samples;
    };
    std::vector<LevelDiag> diagnostics(levels.size());

    std::mutex log_mutex;
    auto fit_level = [&](std::size_t idx) {
      const int level = levels[idx];
      const TopicWordMatrix X =
          load_topic_word_matrix(out_ / ("X_" + std::to_string(level) + ".csv"));
      LsirmConfig lcfg = cfg_.lsirm;
      lcfg.seed = Rng::mix(master_seed, 1000 + static_cast<std::uint64_t>(level));
      const LsirmChain chain = run_lsirm_mcmc(X.values, lcfg);
      const PositionMatrix positions =
          extract_positions(chain, level, lcfg.procrustes_reference);
      save_position_matrix(out_ / ("A_" + std::to_string(level) + ".csv"), positions);
      CsvTable trace;
      trace.header = {"sample", "log_posterior"};
      for (std::size_t s = 0; s < chain.log_posterior.size(); ++s)
        trace.rows.push_back({std::to_string(s), format_double(chain.log_posterior[s])});
      write_csv(out_ / ("lsirm_trace_" + std::to_string(level) + ".csv"), trace);
      diagnostics[idx] = {level, chain.acceptance, chain.samples.size()};
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "[stage lsirm] level " << level << ": " << chain.samples.size()
                << " samples, acceptance theta=" << chain.acceptance.theta
                << " beta=" << chain.acceptance.beta
                << " words=" << chain.acceptance.word_positions
                << " topics=" << chain.acceptance.topic_positions << "\n";
    };

    const std::size_t workers = std::min<std::size_t>(std::max<std::size_t>(cfg_.threads, 1),
                                                      levels.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < levels.size(); ++i) fit_level(i);
    } else {
      std::vector<std::thread> pool;
      std::atomic<std::size_t> next{0};
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= levels.size()) return;
            fit_level(i);
          }
        });
      }
      for (auto& t : pool) t.join();
    }

    CsvTable diag;
    diag.header = {"level", "samples", "accept_theta", "accept_beta", "accept_word_positions",
                   "accept_topic_positions"};
    for (const auto& d : diagnostics)
      diag.rows.push_back({std::to_string(d.level), std::to_string(d.samples),
                           format_double(d.acceptance.theta), format_double(d.acceptance.beta),
                           format_double(d.acceptance.word_positions),
                           format_double(d.acceptance.topic_positions)});
    write_csv(out_ / "lsirm_diagnostics.csv", diag);
  }

  void run_align() {
    const auto levels = selection_levels(cfg_.wordselect);
    std::vector<PositionMatrix> matrices;
    matrices.reserve(levels.size());
    for (int level : levels)
      matrices.push_back(
          load_position_matrix(out_ / ("A_" + std::to_string(level) + ".csv"), level));

    const int baseline = select_baseline(matrices);
    CsvTable profile;
    profile.header = {"level", "mean_distance", "is_baseline"};
    for (const auto& m : matrices)
      profile.rows.push_back({std::to_string(m.level), format_double(mean_origin_distance(m)),
                              m.level == baseline ? "1" : "0"});
    write_csv(out_ / "distance_profile.csv", profile);
    std::cerr << "[stage align] baseline level: " << baseline << "%\n";

    const auto aligned = align_all(matrices, baseline);
    for (const auto& m : aligned)
      save_position_matrix(out_ / ("Astar_" + std::to_string(m.level) + ".csv"), m);

    const auto baseline_it =
        std::find_if(aligned.begin(), aligned.end(),
                     [&](const PositionMatrix& m) { return m.level == baseline; });
    const ObliminResult oblimin = oblimin_rotate(*baseline_it, cfg_.align.oblimin_gamma,
                                                 cfg_.align.tolerance, cfg_.align.max_iterations);
    if (!oblimin.rotation.converged)
      std::cerr << "[stage align] warning: oblimin rotation did not converge in "
                << cfg_.align.max_iterations << " iterations\n";
    save_rotation_matrix(out_ / "R.csv", oblimin.rotation);

    const TrajectorySet trajectories = build_trajectories(aligned, oblimin.rotation);
    for (std::size_t l = 0; l < trajectories.levels.size(); ++l) {
      PositionMatrix b{trajectories.positions[l], trajectories.levels[l]};
      save_position_matrix(out_ / ("B_" + std::to_string(b.level) + ".csv"), b);
    }
    save_trajectories(out_ / "trajectories.csv", trajectories);
  }

  void run_render() {
    const CsvTable profile = read_csv(out_ / "distance_profile.csv");
    std::vector<std::pair<int, double>> distances;
    int baseline = 0;
    for (const auto& row : profile.rows) {
      distances.emplace_back(std::stoi(row[0]), parse_double(row[1]));
      if (row[2] == "1") baseline = std::stoi(row[0]);
    }
    write_text(out_ / "distance_plot.svg", render_distance_plot(distances, baseline));

    const TrajectorySet trajectories = load_trajectories(out_ / "trajectories.csv");
    write_text(out_ / "trajectory_plot.svg",
               render_trajectory_plot(trajectories, load_labels(cfg_.topic_labels)));

    const TopicWordMatrix matrix = load_topic_word_matrix(out_ / "topic_word_matrix.csv");
    const TopicDistribution theta = load_topic_distribution(out_ / "topic_distribution.csv");
    write_text(out_ / "topic_report.csv",
               render_report(matrix, theta, std::min(cfg_.render.top_words, matrix.word_count())));
  }

  const PipelineConfig& cfg_;
  fs::path out_;
};

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config, const std::set<Stage>& stages) {
  config.validate();
  fs::create_directories(config.output_dir);
  const fs::path manifest_path = config.output_dir / "manifest.json";
  RunManifest manifest = RunManifest::load(manifest_path);
  manifest.version = kVersion;

  PipelineRun run(config);
  for (Stage stage : all_stages()) {
    if (!stages.contains(stage)) continue;
    const std::string name = stage_name(stage);
    const StagePlan plan = run.plan(stage);

    for (const auto& input : plan.inputs) {
      if (!fs::exists(input))
        throw std::runtime_error("[stage " + name + "] missing input artifact: " +
                                 input.string());
    }

    // Skip when config, inputs and outputs all hash-match the manifest.
    bool skippable = false;
    const auto it = manifest.stages.find(name);
    if (it != manifest.stages.end() && it->second.config_fingerprint == plan.fingerprint) {
      skippable = true;
      std::map<std::string, std::string> current_inputs;
      for (const auto& input : plan.inputs) current_inputs[input.string()] = hash_file(input);
      if (current_inputs != it->second.input_hashes) skippable = false;
      if (skippable) {
        std::map<std::string, std::string> expected = it->second.output_hashes;
        if (expected.size() != plan.outputs.size()) skippable = false;
        for (const auto& output : plan.outputs) {
          if (!skippable) break;
          const auto rec = expected.find(output.string());
          if (rec == expected.end() || !fs::exists(output) || hash_file(output) != rec->second)
            skippable = false;
        }
      }
    }
    if (skippable) {
      std::cerr << "[stage " << name << "] up to date, skipped\n";
      manifest.stages[name].skipped = true;
      continue;
    }

    try {
      run.execute(stage, plan.seed);
    } catch (const std::exception& e) {
      const std::string what = e.what();
      if (what.rfind("[stage", 0) == 0) throw;
      throw std::runtime_error("[stage " + name + "] " + what);
    }

    StageRecord record;
    record.config_fingerprint = plan.fingerprint;
    record.seed = plan.seed;
    record.timestamp = timestamp_now();
    for (const auto& input : plan.inputs) record.input_hashes[input.string()] = hash_file(input);
    for (const auto& output : plan.outputs) {
      if (!fs::exists(output))
        throw std::runtime_error("[stage " + name + "] expected output was not produced: " +
                                 output.string());
      record.output_hashes[output.string()] = hash_file(output);
    }
    manifest.stages[name] = std::move(record);
    manifest.save(manifest_path);
  }
  manifest.save(manifest_path);
  return manifest;
}

}  // namespace topictraj
