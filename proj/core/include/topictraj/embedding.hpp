#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topictraj/corpus.hpp"

namespace topictraj {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmbeddingConfig {
  std::size_t dimension = 256;
  std::size_t window = 5;
  std::size_t negatives = 20;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  double min_learning_rate_fraction = 1e-4;
  double unigram_power = 0.75;
  // More than one worker trains lock-free on document shards and gives up
  // run-to-run determinism; see the concurrency notes in the README.
  std::size_t threads = 1;

  void validate() const;
};

struct EmbeddingModel {
  std::size_t dimension = 0;
  std::size_t window = 0;
  std::size_t negatives = 0;
  RowMatrixXd input_vectors;    // M x d
  RowMatrixXd context_vectors;  // M x d
};

// Positions of the at-most-`window` tokens on each side of `center`.
std::vector<std::size_t> context_window(const std::vector<std::uint32_t>& doc,
                                        std::size_t center, std::size_t window);

// Negative-sampling loss for one (center, context) pair:
//   -log sigmoid(ctx . in) - sum_n log sigmoid(-neg_n . in)
double sgns_pair_loss(const EmbeddingModel& model, std::uint32_t center, std::uint32_t context,
                      std::span<const std::uint32_t> negatives);

struct SgnsGradients {
  Eigen::VectorXd d_input;                  // w.r.t. input_vectors.row(center)
  Eigen::VectorXd d_context;                // w.r.t. context_vectors.row(context)
  std::vector<Eigen::VectorXd> d_negatives; // w.r.t. context_vectors.row(neg_i)
};

SgnsGradients sgns_pair_gradients(const EmbeddingModel& model, std::uint32_t center,
                                  std::uint32_t context,
                                  std::span<const std::uint32_t> negatives);

// Skip-gram with negative sampling, SGD with linearly decaying learning rate.
// Deterministic for a fixed seed when cfg.threads == 1.
EmbeddingModel train_embeddings(const TokenizedCorpus& corpus, const EmbeddingConfig& cfg,
                                std::uint64_t seed);

// Cosine similarity on input vectors.
std::vector<std::pair<std::uint32_t, double>> nearest_neighbors(const EmbeddingModel& model,
                                                                std::uint32_t word,
                                                                std::size_t k);

struct ExpansionResult {
  Vocabulary vocabulary;
  std::vector<std::string> skipped_keywords;  // absent from the embedding vocabulary
};

// Union of the keywords found in the corpus vocabulary with the k nearest
// embedding neighbors of each; insertion order is keyword order, then
// neighbor rank, duplicates collapsed.
ExpansionResult expand_vocabulary(const EmbeddingModel& model, const Vocabulary& corpus_vocab,
                                  const std::vector<std::string>& keywords, std::size_t k);

void save_embedding_model(const std::filesystem::path& path, const EmbeddingModel& model,
                          const Vocabulary& vocab);
EmbeddingModel load_embedding_model(const std::filesystem::path& path, Vocabulary& vocab_out);

}  // namespace topictraj
