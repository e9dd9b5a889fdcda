// Regenerates the bundled synthetic corpus under data/. Usage:
//   make_synthetic_corpus <output-dir>

#include <iostream>

#include "support/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_synthetic_corpus <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  topictraj::testing::SyntheticCorpusSpec spec;
  topictraj::testing::write_synthetic_corpus(dir / "synthetic_corpus_200.jsonl", spec);
  topictraj::testing::write_synthetic_stoplist(dir / "stopwords.txt", spec);
  std::cout << "wrote " << (dir / "synthetic_corpus_200.jsonl").string() << '\n';
  return 0;
}
