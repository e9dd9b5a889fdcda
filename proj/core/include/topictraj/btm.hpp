#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topictraj/corpus.hpp"

namespace topictraj {

struct Biterm {
  std::uint32_t word_a = 0;  // canonical order: word_a < word_b
  std::uint32_t word_b = 0;
  std::uint64_t multiplicity = 1;
};

struct BitermSet {
  std::vector<Biterm> biterms;
  std::uint64_t total_instances = 0;
  std::size_t vocabulary_size = 0;
};

// All unordered within-document position pairs, identical-word pairs
// excluded, multiplicities aggregated corpus-wide. A nonzero token cap
// truncates pathological documents before pairing.
BitermSet extract_biterms(const TokenizedCorpus& corpus, std::size_t max_doc_tokens = 0);

struct BtmConfig {
  std::size_t topics = 20;
  double alpha = 3.0;
  double beta = 0.01;
  std::size_t iterations = 50000;  // total sweeps, burn-in included
  std::size_t burn_in = 20000;
  std::size_t thin = 100;
  std::uint64_t seed = 0;

  std::size_t retained_samples() const { return (iterations - burn_in + thin - 1) / thin; }
  void validate() const;
};

using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// n_z and n_{w|z}; the invariant sum_w n_wz(w,z) == 2 * n_z(z) holds
// whenever the counts describe a complete assignment state.
struct TopicCounts {
  CountVector topic_counts;      // K
  CountMatrix word_topic_counts; // M x K

  static TopicCounts zero(std::size_t vocab, std::size_t topics);
  void check_invariants(std::uint64_t total_instances) const;
};

struct GibbsCounts {
  TopicCounts counts;
  std::vector<std::uint32_t> assignments;  // one topic per biterm instance
};

// Normalized conditional p(z | z_{-b}) of Eq-style collapsed form
//   (n_z + alpha) * (n_{wi|z} + beta)(n_{wj|z} + beta) / (sum_w n_{w|z} + M beta)^2
// where `counts` excludes the biterm being resampled.
void gibbs_conditional(std::uint32_t word_a, std::uint32_t word_b, const TopicCounts& counts,
                       const BtmConfig& cfg, std::size_t vocab, std::span<double> out);

struct BtmResult {
  GibbsCounts state;
  std::vector<TopicCounts> retained;
};

BtmResult run_btm_gibbs(const BitermSet& biterms, const BtmConfig& cfg);

struct TopicWordMatrix {
  std::vector<std::string> words;  // row labels
  Eigen::MatrixXd values;          // N x P, each column sums to 1 over the vocabulary

  std::size_t word_count() const { return words.size(); }
  std::size_t topic_count() const { return static_cast<std::size_t>(values.cols()); }
};

struct TopicDistribution {
  Eigen::VectorXd theta;  // K-simplex
};

// Posterior point estimates at one count snapshot:
//   phi_{w|z} = (n_{w|z} + beta) / (sum_w n_{w|z} + M beta)
//   theta_z   = (n_z + alpha) / (|B| + K alpha)
std::pair<TopicWordMatrix, TopicDistribution> estimate_distributions(
    const TopicCounts& counts, const BtmConfig& cfg, std::uint64_t total_instances,
    const std::vector<std::string>& words);

// Rao-Blackwellized average of the snapshot estimates over retained samples.
std::pair<TopicWordMatrix, TopicDistribution> estimate_distributions(
    const std::vector<TopicCounts>& retained, const BtmConfig& cfg, std::uint64_t total_instances,
    const std::vector<std::string>& words);

// Per-topic word indices ranked by descending probability; ties break toward
// the lower vocabulary index.
std::vector<std::vector<std::uint32_t>> list_top_words(const TopicWordMatrix& matrix,
                                                       std::size_t k);

void save_topic_word_matrix(const std::filesystem::path& path, const TopicWordMatrix& matrix);
TopicWordMatrix load_topic_word_matrix(const std::filesystem::path& path);
void save_topic_distribution(const std::filesystem::path& path, const TopicDistribution& theta);
TopicDistribution load_topic_distribution(const std::filesystem::path& path);

// Columnar snapshot dump (sample, word, per-topic counts) for resumption.
void save_retained_counts(const std::filesystem::path& path,
                          const std::vector<TopicCounts>& retained);
std::vector<TopicCounts> load_retained_counts(const std::filesystem::path& path);

}  // namespace topictraj
