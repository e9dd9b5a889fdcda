#pragma once

#include <cstdint>
#include <vector>

#include "topictraj/btm.hpp"

namespace topictraj {

struct WordScore {
  std::uint32_t word = 0;
  double cv = 0.0;        // population sd / mean of the word's probability row
  double max_prob = 0.0;  // row maximum
  double cv_rank = 0.0;   // ascending percentile rank in (0, 1]
  double max_rank = 0.0;
  double combined_rank = 0.0;  // min(cv_rank, max_rank)
};

// Per-row dispersion statistics plus percentile ranks over all rows.
// Rank ties break by vocabulary index so the ordering is total.
std::vector<WordScore> row_statistics(const TopicWordMatrix& matrix);

// Words in the top p percent under both criteria: combined_rank > 1 - p/100.
std::vector<std::uint32_t> select_top_words(const std::vector<WordScore>& scores, double percent);

struct MatrixSequence {
  std::vector<int> levels;  // descending percentages
  std::vector<TopicWordMatrix> matrices;
};

// Row-filtered copies of the matrix at each percentage level; row sets are
// nested by construction and entry values are preserved bit-exactly.
MatrixSequence generate_matrix_sequence(const TopicWordMatrix& matrix, int from = 60, int to = 40,
                                        int step = 1);

struct TopicHistogram {
  std::size_t topic = 0;
  std::vector<double> bin_edges;        // bins + 1 edges over the observed log range
  std::vector<std::size_t> bin_counts;  // sums to the word count
  std::size_t above_cutoff = 0;         // rows with log(prob) > cutoff
};

// Natural-log histogram of each topic's word probabilities.
std::vector<TopicHistogram> logprob_histogram(const TopicWordMatrix& matrix, std::size_t bins,
                                              double cutoff = -11.0);

void save_word_scores(const std::filesystem::path& path, const std::vector<WordScore>& scores,
                      const std::vector<std::string>& words);
void save_histograms(const std::filesystem::path& path,
                     const std::vector<TopicHistogram>& histograms);

}  // namespace topictraj
