#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace topictraj::testing {

struct SyntheticCorpusSpec {
  std::size_t documents = 200;
  std::size_t themes = 8;
  std::size_t words_per_theme = 30;
  std::size_t shared_words = 40;
  std::size_t min_doc_tokens = 18;
  std::size_t max_doc_tokens = 30;
  std::uint64_t seed = 20200803;
};

// Deterministic pseudo-word corpus with per-theme vocabularies, shared
// filler words, a sprinkle of noise tokens and per-document keywords.
void write_synthetic_corpus(const std::filesystem::path& jsonl_path,
                            const SyntheticCorpusSpec& spec);

// Companion stoplist removing a few of the shared filler words.
void write_synthetic_stoplist(const std::filesystem::path& path, const SyntheticCorpusSpec& spec);

}  // namespace topictraj::testing
