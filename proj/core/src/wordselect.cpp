#include "topictraj/wordselect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "topictraj/csv.hpp"

namespace topictraj {

namespace {

// Ascending percentile ranks in (0, 1]; ties resolved by word index.
void assign_ranks(std::vector<WordScore>& scores, double WordScore::* value,
                  double WordScore::* rank) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].*value != scores[b].*value) return scores[a].*value < scores[b].*value;
    return scores[a].word < scores[b].word;
  });
  const double n = static_cast<double>(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    scores[order[pos]].*rank = static_cast<double>(pos + 1) / n;
}

}  // namespace

std::vector<WordScore> row_statistics(const TopicWordMatrix& matrix) {
  const auto N = matrix.values.rows();
  const auto P = matrix.values.cols();
  if (N == 0 || P == 0) throw std::invalid_argument("topic-word matrix is empty");

  std::vector<WordScore> scores(static_cast<std::size_t>(N));
  for (Eigen::Index w = 0; w < N; ++w) {
    const auto row = matrix.values.row(w);
    const double mean = row.mean();
    if (!(mean > 0.0)) throw std::runtime_error("zero-mean probability row at index " +
                                                std::to_string(w));
    const double var = (row.array() - mean).square().sum() / static_cast<double>(P);
    auto& s = scores[static_cast<std::size_t>(w)];
    s.word = static_cast<std::uint32_t>(w);
    s.cv = std::sqrt(var) / mean;
    s.max_prob = row.maxCoeff();
  }
  assign_ranks(scores, &WordScore::cv, &WordScore::cv_rank);
  assign_ranks(scores, &WordScore::max_prob, &WordScore::max_rank);
  for (auto& s : scores) s.combined_rank = std::min(s.cv_rank, s.max_rank);
  return scores;
}

std::vector<std::uint32_t> select_top_words(const std::vector<WordScore>& scores, double percent) {
  if (!(percent > 0.0) || percent > 100.0)
    throw std::invalid_argument("percent must lie in (0, 100]");
  const double threshold = 1.0 - percent / 100.0;
  std::vector<std::uint32_t> selected;
  for (const auto& s : scores)
    if (s.combined_rank > threshold) selected.push_back(s.word);
  if (selected.empty())
    throw std::runtime_error("word selection at " + std::to_string(percent) + "% is empty");
  std::sort(selected.begin(), selected.end());
  return selected;
}

MatrixSequence generate_matrix_sequence(const TopicWordMatrix& matrix, int from, int to,
                                        int step) {
  if (from <= to) throw std::invalid_argument("'from' level must exceed 'to' level");
  if (step < 1) throw std::invalid_argument("step must be >= 1");
  const std::vector<WordScore> scores = row_statistics(matrix);

  MatrixSequence seq;
  for (int level = from; level >= to; level -= step) {
    const auto selected = select_top_words(scores, static_cast<double>(level));
    TopicWordMatrix restricted;
    restricted.values.resize(static_cast<Eigen::Index>(selected.size()), matrix.values.cols());
    restricted.words.reserve(selected.size());
    for (std::size_t r = 0; r < selected.size(); ++r) {
      restricted.words.push_back(matrix.words[selected[r]]);
      restricted.values.row(static_cast<Eigen::Index>(r)) = matrix.values.row(selected[r]);
    }
    seq.levels.push_back(level);
    seq.matrices.push_back(std::move(restricted));
  }
  return seq;
}

std::vector<TopicHistogram> logprob_histogram(const TopicWordMatrix& matrix, std::size_t bins,
                                              double cutoff) {
  if (bins == 0) throw std::invalid_argument("bins must be >= 1");
  if ((matrix.values.array() <= 0.0).any())
    throw std::runtime_error("cannot log-transform nonpositive probabilities");

  std::vector<TopicHistogram> result;
  result.reserve(matrix.topic_count());
  for (std::size_t z = 0; z < matrix.topic_count(); ++z) {
    const auto col = matrix.values.col(static_cast<Eigen::Index>(z));
    Eigen::ArrayXd logs = col.array().log();
    TopicHistogram h;
    h.topic = z;
    const double lo = logs.minCoeff();
    const double hi = logs.maxCoeff();
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    h.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
      h.bin_edges[b] = lo + static_cast<double>(b) * width;
    h.bin_counts.assign(bins, 0);
    for (Eigen::Index i = 0; i < logs.size(); ++i) {
      auto b = static_cast<std::size_t>((logs(i) - lo) / width);
      if (b >= bins) b = bins - 1;  // the maximum lands in the last bin
      ++h.bin_counts[b];
      if (logs(i) > cutoff) ++h.above_cutoff;
    }
    result.push_back(std::move(h));
  }
  return result;
}

void save_word_scores(const std::filesystem::path& path, const std::vector<WordScore>& scores,
                      const std::vector<std::string>& words) {
  CsvTable table;
  table.header = {"word", "cv", "max_prob", "combined_rank"};
  for (const auto& s : scores)
    table.rows.push_back({words[s.word], format_double(s.cv), format_double(s.max_prob),
                          format_double(s.combined_rank)});
  write_csv(path, table);
}

void save_histograms(const std::filesystem::path& path,
                     const std::vector<TopicHistogram>& histograms) {
  CsvTable table;
  table.header = {"topic", "bin_left", "bin_right", "count"};
  for (const auto& h : histograms) {
    for (std::size_t b = 0; b < h.bin_counts.size(); ++b)
      table.rows.push_back({std::to_string(h.topic + 1), format_double(h.bin_edges[b]),
                            format_double(h.bin_edges[b + 1]), std::to_string(h.bin_counts[b])});
  }
  write_csv(path, table);
}

}  // namespace topictraj
