#include <doctest.h>

#include <fstream>

#include "support/temp_dir.hpp"
#include "topictraj/corpus.hpp"
#include "topictraj/rng.hpp"

using namespace topictraj;

namespace {

std::filesystem::path write_jsonl(const testing::ScopedTempDir& tmp, const std::string& body) {
  const auto path = tmp.path() / "docs.jsonl";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("ingest drops records without abstracts and reports the count") {
  testing::ScopedTempDir tmp;
  const auto path = write_jsonl(
      tmp,
      R"({"id":"1","title":"t","abstract":"alpha beta","keywords":["k"]})" "\n"
      R"({"id":"2","title":"t","abstract":"","keywords":[]})" "\n"
      R"({"id":"3","title":"t","abstract":"gamma delta","keywords":[]})" "\n");
  const IngestResult r = ingest_documents(path);
  CHECK(r.documents.documents.size() == 2);
  CHECK(r.stats.dropped_no_abstract == 1);
  CHECK(r.documents.documents[0].id == "1");
  CHECK(r.documents.documents[1].id == "3");
}

TEST_CASE("ingest of an empty file yields an empty set") {
  testing::ScopedTempDir tmp;
  const IngestResult r = ingest_documents(write_jsonl(tmp, ""));
  CHECK(r.documents.documents.empty());
  CHECK(r.stats.lines_read == 0);
}

TEST_CASE("duplicate ids: the second record is skipped with a warning") {
  testing::ScopedTempDir tmp;
  const auto path = write_jsonl(
      tmp,
      R"({"id":"x","abstract":"first body"})" "\n"
      R"({"id":"x","abstract":"second body"})" "\n");
  const IngestResult r = ingest_documents(path);
  CHECK(r.documents.documents.size() == 1);
  CHECK(r.documents.documents[0].abstract_text == "first body");
  CHECK(r.stats.skipped_duplicate_id == 1);
  REQUIRE(r.stats.warnings.size() == 1);
  CHECK(r.stats.warnings[0].find("line 2") != std::string::npos);
}

TEST_CASE("malformed lines are skipped with their line number") {
  testing::ScopedTempDir tmp;
  const auto path = write_jsonl(tmp,
                                R"({"id":"1","abstract":"ok here"})" "\n"
                                "this is not json\n"
                                R"({"abstract":"missing id"})" "\n");
  const IngestResult r = ingest_documents(path);
  CHECK(r.documents.documents.size() == 1);
  CHECK(r.stats.skipped_malformed == 2);
  CHECK(r.stats.warnings[0].find("line 2") != std::string::npos);
  CHECK(r.stats.warnings[1].find("line 3") != std::string::npos);
}

TEST_CASE("unreadable file is fatal") {
  CHECK_THROWS(ingest_documents("/nonexistent/nowhere.jsonl"));
}

TEST_CASE("noise filtering removes short tokens, numerals and latin abbreviations") {
  const FilterConfig filter;
  const auto tokens = apply_filter(tokenize("virus p.001 ie l."), filter);
  CHECK(tokens == std::vector<std::string>{"virus"});
}

TEST_CASE("case folding maps all spellings to one vocabulary entry") {
  DocumentSet docs;
  docs.documents.push_back({"1", "", "Virus VIRUS virus", {}});
  const TokenizedCorpus corpus = build_tokenized_corpus(docs, FilterConfig{});
  CHECK(corpus.vocabulary_size() == 1);
  CHECK(corpus.documents[0] == std::vector<std::uint32_t>{0, 0, 0});
}

TEST_CASE("stoplist entries are removed") {
  FilterConfig filter;
  filter.stopwords.insert("data");
  const auto tokens = apply_filter(tokenize("data virus data analysis"), filter);
  CHECK(tokens == std::vector<std::string>{"virus", "analysis"});
}

TEST_CASE("a corpus emptied by filtering is fatal") {
  DocumentSet docs;
  docs.documents.push_back({"1", "", "p.001 ie 42 x", {}});
  CHECK_THROWS(build_tokenized_corpus(docs, FilterConfig{}));
}

TEST_CASE("tokenization is idempotent on filtered text") {
  Rng rng(31);
  const std::vector<std::string> pool = {"virus",  "spike", "p.001", "IE",    "binding",
                                         "IL-6",   "l.",    "covid", "n1427", "assay",
                                         "74",     "x",     "serum", "cell",  "titer"};
  const FilterConfig filter;
  for (int trial = 0; trial < 50; ++trial) {
    std::string text;
    const std::size_t len = 3 + rng.uniform_below(25);
    for (std::size_t i = 0; i < len; ++i) {
      if (i) text += ' ';
      text += pool[rng.uniform_below(pool.size())];
    }
    const auto once = apply_filter(tokenize(text), filter);
    std::string rejoined;
    for (const auto& t : once) {
      if (!rejoined.empty()) rejoined += ' ';
      rejoined += t;
    }
    CHECK(apply_filter(tokenize(rejoined), filter) == once);
  }
}

TEST_CASE("vocabulary round trip: lookup(word(i)) == i") {
  Vocabulary vocab;
  for (const auto& w : {"alpha", "beta", "gamma", "delta"}) vocab.add(w);
  for (std::uint32_t i = 0; i < vocab.size(); ++i) CHECK(vocab.lookup(vocab.word(i)) == i);
  CHECK(!vocab.lookup("missing").has_value());
}

TEST_CASE("vocabulary save/load preserves index order") {
  testing::ScopedTempDir tmp;
  Vocabulary vocab;
  for (const auto& w : {"zeta", "alpha", "mu"}) vocab.add(w);
  save_vocabulary(tmp.path() / "v.txt", vocab);
  const Vocabulary back = load_vocabulary(tmp.path() / "v.txt");
  CHECK(back.tokens() == vocab.tokens());
}

TEST_CASE("tokenized corpus save/load preserves documents") {
  testing::ScopedTempDir tmp;
  DocumentSet docs;
  docs.documents.push_back({"a", "", "spike binding assay", {}});
  docs.documents.push_back({"b", "", "binding serum", {}});
  const TokenizedCorpus corpus = build_tokenized_corpus(docs, FilterConfig{});
  save_tokenized_corpus(tmp.path() / "c.txt", corpus);
  const TokenizedCorpus back = load_tokenized_corpus(tmp.path() / "c.txt");
  CHECK(back.doc_ids == corpus.doc_ids);
  CHECK(back.documents == corpus.documents);
  CHECK(back.vocabulary.tokens() == corpus.vocabulary.tokens());
}

TEST_CASE("restrict_to_vocabulary drops foreign tokens and empty documents") {
  DocumentSet docs;
  docs.documents.push_back({"a", "", "spike binding assay", {}});
  docs.documents.push_back({"b", "", "serum titer", {}});
  const TokenizedCorpus corpus = build_tokenized_corpus(docs, FilterConfig{});
  Vocabulary target;
  target.add("binding");
  target.add("spike");
  const TokenizedCorpus restricted = restrict_to_vocabulary(corpus, target);
  CHECK(restricted.doc_ids == std::vector<std::string>{"a"});
  CHECK(restricted.documents[0] == std::vector<std::uint32_t>{1, 0});
}

TEST_CASE("collect_keywords tokenizes, filters and deduplicates in order") {
  DocumentSet docs;
  docs.documents.push_back({"1", "", "body", {"Spike Protein", "p.001"}});
  docs.documents.push_back({"2", "", "body", {"protein", "Assay"}});
  const auto keywords = collect_keywords(docs, FilterConfig{});
  CHECK(keywords == std::vector<std::string>{"spike", "protein", "assay"});
}
