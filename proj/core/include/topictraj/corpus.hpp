#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace topictraj {

struct Document {
  std::string id;
  std::string title;
  std::string abstract_text;
  std::vector<std::string> keywords;
};

struct DocumentSet {
  std::vector<Document> documents;
};

struct IngestStats {
  std::size_t lines_read = 0;
  std::size_t dropped_no_abstract = 0;
  std::size_t skipped_malformed = 0;
  std::size_t skipped_duplicate_id = 0;
  std::vector<std::string> warnings;
};

struct IngestResult {
  DocumentSet documents;
  IngestStats stats;
};

// One JSONL record per line with fields id/title/abstract/keywords.
// Records with an empty or missing abstract are dropped and counted;
// malformed lines and duplicate ids are skipped with a warning.
IngestResult ingest_documents(const std::filesystem::path& path);

// Ordered set of distinct words; the index of a word is its position.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Appends if absent, returns the index either way.
  std::uint32_t add(const std::string& token);
  std::optional<std::uint32_t> lookup(std::string_view token) const;
  const std::string& word(std::uint32_t index) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct FilterConfig {
  std::size_t min_token_length = 2;
  bool drop_tokens_with_digits = true;
  // Latin abbreviations survive the character rules but carry no content;
  // user stoplists extend this set.
  std::unordered_set<std::string> stopwords = {"ie", "eg", "etc", "et", "al", "vs"};
};

// Lowercases and splits on any non-alphanumeric character.
std::vector<std::string> tokenize(std::string_view text);
std::vector<std::string> apply_filter(const std::vector<std::string>& tokens,
                                      const FilterConfig& filter);

struct TokenizedCorpus {
  std::vector<std::string> doc_ids;
  std::vector<std::vector<std::uint32_t>> documents;
  Vocabulary vocabulary;

  std::size_t vocabulary_size() const { return vocabulary.size(); }
};

// Tokenizes title+abstract of every document, applies the noise filter and
// drops documents that end up empty. Throws if nothing survives.
TokenizedCorpus build_tokenized_corpus(const DocumentSet& docs, const FilterConfig& filter);

// Re-expresses the corpus over `target` vocabulary: tokens outside it are
// dropped, emptied documents removed.
TokenizedCorpus restrict_to_vocabulary(const TokenizedCorpus& corpus, const Vocabulary& target);

// Keyword tokens in first-seen document order, filtered by the same rules.
std::vector<std::string> collect_keywords(const DocumentSet& docs, const FilterConfig& filter);

std::unordered_set<std::string> load_stoplist(const std::filesystem::path& path);

// Plain text, one token per line, line order = index order.
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::filesystem::path& path);

// One document per line: "<doc_id>\t<token> <token> ...".
void save_tokenized_corpus(const std::filesystem::path& path, const TokenizedCorpus& corpus);
TokenizedCorpus load_tokenized_corpus(const std::filesystem::path& path);

}  // namespace topictraj
