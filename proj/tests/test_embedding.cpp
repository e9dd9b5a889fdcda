#include <doctest.h>

#include <cmath>
#include <unordered_set>

#include "support/temp_dir.hpp"
#include "topictraj/embedding.hpp"
#include "topictraj/rng.hpp"

using namespace topictraj;

namespace {

TokenizedCorpus corpus_from_docs(const std::vector<std::vector<std::string>>& docs) {
  TokenizedCorpus corpus;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::vector<std::uint32_t> indices;
    for (const auto& t : docs[d]) indices.push_back(corpus.vocabulary.add(t));
    corpus.doc_ids.push_back("doc" + std::to_string(d));
    corpus.documents.push_back(std::move(indices));
  }
  return corpus;
}

EmbeddingModel random_model(std::size_t vocab, std::size_t dim, std::uint64_t seed) {
  EmbeddingModel model;
  model.dimension = dim;
  model.input_vectors.resize(vocab, dim);
  model.context_vectors.resize(vocab, dim);
  Rng rng(seed);
  for (std::size_t r = 0; r < vocab; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      model.input_vectors(r, c) = rng.normal(0.0, 0.6);
      model.context_vectors(r, c) = rng.normal(0.0, 0.6);
    }
  return model;
}

}  // namespace

TEST_CASE("window of two around the center picks the four nearest words") {
  const auto corpus = corpus_from_docs(
      {{"horse", "money", "king", "queen", "princess", "prince", "palace", "flowers"}});
  const auto& doc = corpus.documents[0];
  const auto positions = context_window(doc, 4, 2);  // center = princess
  std::vector<std::string> words;
  for (auto p : positions) words.push_back(corpus.vocabulary.word(doc[p]));
  CHECK(words == std::vector<std::string>{"king", "queen", "prince", "palace"});
}

TEST_CASE("window clips at document boundaries") {
  const auto corpus = corpus_from_docs({{"a", "b", "c"}});
  CHECK(context_window(corpus.documents[0], 0, 2) == std::vector<std::size_t>{1, 2});
  CHECK(context_window(corpus.documents[0], 2, 5) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("analytic SGNS gradients match central finite differences") {
  // 5-word toy setup, random parameters, both input and context vectors.
  const std::size_t vocab = 5, dim = 8;
  EmbeddingModel model = random_model(vocab, dim, 123);
  const std::uint32_t center = 1, context = 3;
  const std::vector<std::uint32_t> negatives = {0, 2, 4};

  const SgnsGradients grads = sgns_pair_gradients(model, center, context, negatives);
  const double h = 1e-6;
  double max_rel = 0.0;
  auto check_entry = [&](double* slot, double analytic) {
    const double saved = *slot;
    *slot = saved + h;
    const double up = sgns_pair_loss(model, center, context, negatives);
    *slot = saved - h;
    const double down = sgns_pair_loss(model, center, context, negatives);
    *slot = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(numeric - analytic) / std::max(1e-8, std::abs(numeric));
    max_rel = std::max(max_rel, rel);
  };
  for (std::size_t k = 0; k < dim; ++k)
    check_entry(&model.input_vectors(center, k), grads.d_input(k));
  for (std::size_t k = 0; k < dim; ++k)
    check_entry(&model.context_vectors(context, k), grads.d_context(k));
  for (std::size_t n = 0; n < negatives.size(); ++n)
    for (std::size_t k = 0; k < dim; ++k)
      check_entry(&model.context_vectors(negatives[n], k), grads.d_negatives[n](k));
  CHECK(max_rel < 1e-4);
}

TEST_CASE("words that always co-occur embed closer than unrelated words") {
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 150; ++i) docs.push_back({"spike", "binding"});
  for (int i = 0; i < 150; ++i) docs.push_back({"serum", "titer"});
  const auto corpus = corpus_from_docs(docs);
  EmbeddingConfig cfg;
  cfg.dimension = 16;
  cfg.window = 2;
  cfg.negatives = 5;
  cfg.epochs = 5;
  const EmbeddingModel model = train_embeddings(corpus, cfg, 42);

  auto cosine = [&](const std::string& a, const std::string& b) {
    const auto ia = *corpus.vocabulary.lookup(a);
    const auto ib = *corpus.vocabulary.lookup(b);
    const auto ra = model.input_vectors.row(ia);
    const auto rb = model.input_vectors.row(ib);
    return ra.dot(rb) / (ra.norm() * rb.norm());
  };
  CHECK(cosine("spike", "binding") > cosine("spike", "serum"));
  CHECK(cosine("serum", "titer") > cosine("binding", "titer"));
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 20; ++i) docs.push_back({"a", "b", "c", "d", "e", "b", "a"});
  const auto corpus = corpus_from_docs(docs);
  EmbeddingConfig cfg;
  cfg.dimension = 8;
  cfg.window = 2;
  cfg.negatives = 3;
  cfg.epochs = 2;
  const EmbeddingModel m1 = train_embeddings(corpus, cfg, 7);
  const EmbeddingModel m2 = train_embeddings(corpus, cfg, 7);
  CHECK(m1.input_vectors == m2.input_vectors);
  CHECK(m1.context_vectors == m2.context_vectors);
}

TEST_CASE("expand_vocabulary returns the top-cosine neighbors of each keyword") {
  // Constructed embeddings with known angles in the plane.
  EmbeddingModel model;
  model.dimension = 2;
  model.input_vectors.resize(5, 2);
  model.context_vectors.setZero(5, 2);
  const double angles[5] = {0.0, 0.1, 0.4, 1.2, 3.0};
  for (int i = 0; i < 5; ++i) {
    model.input_vectors(i, 0) = std::cos(angles[i]);
    model.input_vectors(i, 1) = std::sin(angles[i]);
  }
  Vocabulary vocab;
  for (const auto& w : {"w0", "w1", "w2", "w3", "w4"}) vocab.add(w);

  const ExpansionResult r = expand_vocabulary(model, vocab, {"w0"}, 2);
  CHECK(r.vocabulary.tokens() == std::vector<std::string>{"w0", "w1", "w2"});
}

TEST_CASE("expand_vocabulary with k=0 keeps exactly the present keywords") {
  EmbeddingModel model = random_model(4, 3, 5);
  Vocabulary vocab;
  for (const auto& w : {"a", "b", "c", "d"}) vocab.add(w);
  const ExpansionResult r = expand_vocabulary(model, vocab, {"c", "a", "zz"}, 0);
  CHECK(r.vocabulary.tokens() == std::vector<std::string>{"c", "a"});
  CHECK(r.skipped_keywords == std::vector<std::string>{"zz"});
}

TEST_CASE("expansion output is a keyword superset within the size bound") {
  EmbeddingModel model = random_model(30, 6, 77);
  Vocabulary vocab;
  for (int i = 0; i < 30; ++i) vocab.add("w" + std::to_string(i));
  const std::vector<std::string> keywords = {"w3", "w7", "w json", "w12"};
  const std::size_t k = 4;
  const ExpansionResult r = expand_vocabulary(model, vocab, keywords, k);
  for (const auto& kw : {"w3", "w7", "w12"}) CHECK(r.vocabulary.lookup(kw).has_value());
  CHECK(r.vocabulary.size() <= keywords.size() * (k + 1));
  // A neighbor that is already a keyword appears once: all tokens distinct.
  std::unordered_set<std::string> seen(r.vocabulary.tokens().begin(),
                                       r.vocabulary.tokens().end());
  CHECK(seen.size() == r.vocabulary.size());
}

TEST_CASE("embedding model save/load round trip") {
  testing::ScopedTempDir tmp;
  EmbeddingModel model = random_model(6, 4, 11);
  model.window = 3;
  model.negatives = 7;
  Vocabulary vocab;
  for (int i = 0; i < 6; ++i) vocab.add("tok" + std::to_string(i));
  save_embedding_model(tmp.path() / "emb.txt", model, vocab);
  Vocabulary vocab_back;
  const EmbeddingModel back = load_embedding_model(tmp.path() / "emb.txt", vocab_back);
  CHECK(vocab_back.tokens() == vocab.tokens());
  CHECK(back.input_vectors == model.input_vectors);
  CHECK(back.context_vectors == model.context_vectors);
  CHECK(back.window == 3);
  CHECK(back.negatives == 7);
}

TEST_CASE("degenerate configurations are rejected") {
  const auto corpus = corpus_from_docs({{"a", "b"}});
  EmbeddingConfig cfg;
  cfg.dimension = 0;
  CHECK_THROWS(train_embeddings(corpus, cfg, 1));
  const auto single = corpus_from_docs({{"a", "a"}});
  CHECK_THROWS(train_embeddings(single, EmbeddingConfig{}, 1));
}
