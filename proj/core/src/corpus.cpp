#include "topictraj/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace topictraj {

using nlohmann::json;

IngestResult ingest_documents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  IngestResult result;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ++result.stats.lines_read;

    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("id") ||
        !record["id"].is_string() || record["id"].get<std::string>().empty()) {
      ++result.stats.skipped_malformed;
      result.stats.warnings.push_back("line " + std::to_string(line_no) + ": malformed record, skipped");
      continue;
    }

    Document doc;
    doc.id = record["id"].get<std::string>();
    if (seen_ids.contains(doc.id)) {
      ++result.stats.skipped_duplicate_id;
      result.stats.warnings.push_back("line " + std::to_string(line_no) + ": duplicate id '" +
                                      doc.id + "', skipped");
      continue;
    }
    if (record.contains("title") && record["title"].is_string())
      doc.title = record["title"].get<std::string>();
    if (record.contains("abstract") && record["abstract"].is_string())
      doc.abstract_text = record["abstract"].get<std::string>();
    if (record.contains("keywords") && record["keywords"].is_array()) {
      for (const auto& k : record["keywords"])
        if (k.is_string()) doc.keywords.push_back(k.get<std::string>());
    }

    if (doc.abstract_text.find_first_not_of(" \t\r\n") == std::string::npos) {
      ++result.stats.dropped_no_abstract;
      continue;
    }
    seen_ids.insert(doc.id);
    result.documents.documents.push_back(std::move(doc));
  }
  return result;
}

std::uint32_t Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const auto idx = static_cast<std::uint32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, idx);
  return idx;
}

std::optional<std::uint32_t> Vocabulary::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::word(std::uint32_t index) const {
  if (index >= tokens_.size()) throw std::out_of_range("vocabulary index out of range");
  return tokens_[index];
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

static bool is_noise(const std::string& token, const FilterConfig& filter) {
  if (token.size() < filter.min_token_length) return true;
  if (filter.drop_tokens_with_digits &&
      std::any_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); }))
    return true;
  return filter.stopwords.contains(token);
}

std::vector<std::string> apply_filter(const std::vector<std::string>& tokens,
                                      const FilterConfig& filter) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!is_noise(t, filter)) kept.push_back(t);
  return kept;
}

TokenizedCorpus build_tokenized_corpus(const DocumentSet& docs, const FilterConfig& filter) {
  if (docs.documents.empty()) throw std::invalid_argument("document set is empty");
  TokenizedCorpus corpus;
  for (const auto& doc : docs.documents) {
    std::vector<std::string> tokens = apply_filter(tokenize(doc.abstract_text), filter);
    if (tokens.empty()) continue;
    std::vector<std::uint32_t> indices;
    indices.reserve(tokens.size());
    for (const auto& t : tokens) indices.push_back(corpus.vocabulary.add(t));
    corpus.doc_ids.push_back(doc.id);
    corpus.documents.push_back(std::move(indices));
  }
  if (corpus.documents.empty())
    throw std::runtime_error("all documents were emptied by token filtering");
  return corpus;
}

TokenizedCorpus restrict_to_vocabulary(const TokenizedCorpus& corpus, const Vocabulary& target) {
  TokenizedCorpus restricted;
  restricted.vocabulary = target;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    std::vector<std::uint32_t> indices;
    for (std::uint32_t idx : corpus.documents[d]) {
      if (auto mapped = target.lookup(corpus.vocabulary.word(idx))) indices.push_back(*mapped);
    }
    if (indices.empty()) continue;
    restricted.doc_ids.push_back(corpus.doc_ids[d]);
    restricted.documents.push_back(std::move(indices));
  }
  if (restricted.documents.empty())
    throw std::runtime_error("no document retains any token of the target vocabulary");
  return restricted;
}

std::vector<std::string> collect_keywords(const DocumentSet& docs, const FilterConfig& filter) {
  std::vector<std::string> keywords;
  std::unordered_set<std::string> seen;
  for (const auto& doc : docs.documents) {
    for (const auto& raw : doc.keywords) {
      for (const auto& token : apply_filter(tokenize(raw), filter)) {
        if (seen.insert(token).second) keywords.push_back(token);
      }
    }
  }
  return keywords;
}

std::unordered_set<std::string> load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stoplist " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& t : vocab.tokens()) out << t << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Vocabulary vocab;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    vocab.add(line);
  }
  return vocab;
}

void save_tokenized_corpus(const std::filesystem::path& path, const TokenizedCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    out << corpus.doc_ids[d] << '\t';
    const auto& doc = corpus.documents[d];
    for (std::size_t i = 0; i < doc.size(); ++i)
      out << (i ? " " : "") << corpus.vocabulary.word(doc[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TokenizedCorpus load_tokenized_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  TokenizedCorpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("bad corpus line in " + path.string());
    corpus.doc_ids.push_back(line.substr(0, tab));
    std::istringstream tokens(line.substr(tab + 1));
    std::vector<std::uint32_t> indices;
    std::string token;
    while (tokens >> token) indices.push_back(corpus.vocabulary.add(token));
    corpus.documents.push_back(std::move(indices));
  }
  if (corpus.documents.empty()) throw std::runtime_error("empty corpus file: " + path.string());
  return corpus;
}

}  // namespace topictraj
