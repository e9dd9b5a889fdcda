#include "support/synthetic.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>
#include <unordered_set>

#include "topictraj/rng.hpp"

namespace topictraj::testing {

namespace {

const char* kOnsets[] = {"br", "cl", "dr", "fl", "gr", "kr", "pl", "sk", "tr", "vp",
                         "m",  "n",  "p",  "r",  "s",  "t",  "v",  "z",  "l",  "d"};
const char* kNuclei[] = {"a", "e", "i", "o", "u", "ae", "ou", "ei"};
const char* kCodas[] = {"n", "rm", "st", "x", "th", "ck", "ld", "sh", "ph", "g"};

std::string pseudo_word(Rng& rng, std::size_t syllables) {
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kOnsets[rng.uniform_below(std::size(kOnsets))];
    w += kNuclei[rng.uniform_below(std::size(kNuclei))];
  }
  w += kCodas[rng.uniform_below(std::size(kCodas))];
  return w;
}

std::vector<std::string> make_word_pool(Rng& rng, std::size_t count, std::size_t syllables) {
  std::vector<std::string> pool;
  std::unordered_set<std::string> seen;
  while (pool.size() < count) {
    std::string w = pseudo_word(rng, syllables);
    if (seen.insert(w).second) pool.push_back(std::move(w));
  }
  return pool;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

void write_synthetic_corpus(const std::filesystem::path& jsonl_path,
                            const SyntheticCorpusSpec& spec) {
  Rng rng(spec.seed);
  Rng vocab_rng = rng.child(1);
  Rng doc_rng = rng.child(2);

  std::vector<std::vector<std::string>> theme_words(spec.themes);
  for (std::size_t t = 0; t < spec.themes; ++t)
    theme_words[t] = make_word_pool(vocab_rng, spec.words_per_theme, 2);
  const std::vector<std::string> shared = make_word_pool(vocab_rng, spec.shared_words, 3);
  const char* noise[] = {"p", "x9", "2021", "n1427", "ie", "q"};

  std::ofstream out(jsonl_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + jsonl_path.string());
  for (std::size_t d = 0; d < spec.documents; ++d) {
    const std::size_t theme = d % spec.themes;
    const auto& words = theme_words[theme];
    const std::size_t len =
        spec.min_doc_tokens + doc_rng.uniform_below(spec.max_doc_tokens - spec.min_doc_tokens + 1);

    std::string abstract;
    for (std::size_t i = 0; i < len; ++i) {
      if (!abstract.empty()) abstract += ' ';
      const double u = doc_rng.uniform();
      if (u < 0.70) {
        // Zipf-like tilt toward the front of the theme vocabulary.
        const std::size_t r = std::min(doc_rng.uniform_below(words.size()),
                                       doc_rng.uniform_below(words.size()));
        abstract += words[r];
      } else if (u < 0.95) {
        abstract += shared[doc_rng.uniform_below(shared.size())];
      } else {
        abstract += noise[doc_rng.uniform_below(std::size(noise))];
      }
    }

    std::string keywords;
    const std::size_t kw = 2 + doc_rng.uniform_below(2);
    for (std::size_t i = 0; i < kw; ++i) {
      if (i) keywords += ',';
      keywords += '"' + json_escape(words[doc_rng.uniform_below(6)]) + '"';
    }

    out << "{\"id\":\"doc-" << (d + 1) << "\",\"title\":\"synthetic abstract " << (d + 1)
        << "\",\"abstract\":\"" << json_escape(abstract) << "\",\"keywords\":[" << keywords
        << "]}\n";
  }
  if (!out) throw std::runtime_error("write failed: " + jsonl_path.string());
}

void write_synthetic_stoplist(const std::filesystem::path& path,
                              const SyntheticCorpusSpec& spec) {
  Rng rng(spec.seed);
  Rng vocab_rng = rng.child(1);
  for (std::size_t t = 0; t < spec.themes; ++t) make_word_pool(vocab_rng, spec.words_per_theme, 2);
  const std::vector<std::string> shared = make_word_pool(vocab_rng, spec.shared_words, 3);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  // Drop the first few shared fillers, mirroring common-word removal.
  for (std::size_t i = 0; i < 4 && i < shared.size(); ++i) out << shared[i] << '\n';
}

}  // namespace topictraj::testing
