#include "topictraj/btm.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "topictraj/csv.hpp"
#include "topictraj/rng.hpp"

namespace topictraj {

BitermSet extract_biterms(const TokenizedCorpus& corpus, std::size_t max_doc_tokens) {
  if (corpus.documents.empty()) throw std::invalid_argument("corpus is empty");
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> counts;
  for (const auto& doc : corpus.documents) {
    const std::size_t n =
        max_doc_tokens ? std::min(doc.size(), max_doc_tokens) : doc.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (doc[i] == doc[j]) continue;
        const auto a = std::min(doc[i], doc[j]);
        const auto b = std::max(doc[i], doc[j]);
        ++counts[{a, b}];
      }
    }
  }
  if (counts.empty())
    throw std::runtime_error("corpus yields no biterms (every document has < 2 distinct tokens)");
  BitermSet set;
  set.vocabulary_size = corpus.vocabulary_size();
  set.biterms.reserve(counts.size());
  for (const auto& [pair, mult] : counts) {
    set.biterms.push_back({pair.first, pair.second, mult});
    set.total_instances += mult;
  }
  return set;
}

void BtmConfig::validate() const {
  if (topics < 2) throw std::invalid_argument("topic count K must be >= 2");
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
  if (iterations == 0) throw std::invalid_argument("iterations must be positive");
  if (burn_in >= iterations) throw std::invalid_argument("burn-in must be < iterations");
  if (thin == 0) throw std::invalid_argument("thin must be >= 1");
}

TopicCounts TopicCounts::zero(std::size_t vocab, std::size_t topics) {
  TopicCounts c;
  c.topic_counts = CountVector::Zero(static_cast<Eigen::Index>(topics));
  c.word_topic_counts =
      CountMatrix::Zero(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(topics));
  return c;
}

void TopicCounts::check_invariants(std::uint64_t total_instances) const {
  if ((topic_counts.array() < 0).any() || (word_topic_counts.array() < 0).any())
    throw std::logic_error("negative count in sampler state");
  if (topic_counts.sum() != static_cast<std::int64_t>(total_instances))
    throw std::logic_error("topic counts do not sum to the biterm total");
  for (Eigen::Index z = 0; z < topic_counts.size(); ++z) {
    if (word_topic_counts.col(z).sum() != 2 * topic_counts(z))
      throw std::logic_error("word counts do not sum to 2 * n_z");
  }
}

namespace {

// Shared kernel; `word_totals[z]` must equal sum_w n_{w|z}.
void conditional_from_totals(std::uint32_t word_a, std::uint32_t word_b,
                             const TopicCounts& counts, std::span<const std::int64_t> word_totals,
                             const BtmConfig& cfg, std::size_t vocab, std::span<double> out) {
  const double m_beta = static_cast<double>(vocab) * cfg.beta;
  double total = 0.0;
  for (std::size_t z = 0; z < cfg.topics; ++z) {
    const auto zi = static_cast<Eigen::Index>(z);
    const double denom = static_cast<double>(word_totals[z]) + m_beta;
    const double p = (static_cast<double>(counts.topic_counts(zi)) + cfg.alpha) *
                     (static_cast<double>(counts.word_topic_counts(word_a, zi)) + cfg.beta) *
                     (static_cast<double>(counts.word_topic_counts(word_b, zi)) + cfg.beta) /
                     (denom * denom);
    out[z] = p;
    total += p;
  }
  for (auto& p : out) p /= total;
}

}  // namespace

void gibbs_conditional(std::uint32_t word_a, std::uint32_t word_b, const TopicCounts& counts,
                       const BtmConfig& cfg, std::size_t vocab, std::span<double> out) {
  if (out.size() != cfg.topics) throw std::invalid_argument("output span size must equal K");
  std::vector<std::int64_t> totals(cfg.topics);
  for (std::size_t z = 0; z < cfg.topics; ++z)
    totals[z] = counts.word_topic_counts.col(static_cast<Eigen::Index>(z)).sum();
  conditional_from_totals(word_a, word_b, counts, totals, cfg, vocab, out);
}

namespace {

struct Instance {
  std::uint32_t word_a, word_b;
};

void remove_instance(TopicCounts& counts, const Instance& b, std::uint32_t z) {
  counts.topic_counts(z) -= 1;
  counts.word_topic_counts(b.word_a, z) -= 1;
  counts.word_topic_counts(b.word_b, z) -= 1;
}

void add_instance(TopicCounts& counts, const Instance& b, std::uint32_t z) {
  counts.topic_counts(z) += 1;
  counts.word_topic_counts(b.word_a, z) += 1;
  counts.word_topic_counts(b.word_b, z) += 1;
}

}  // namespace

BtmResult run_btm_gibbs(const BitermSet& biterms, const BtmConfig& cfg) {
  cfg.validate();
  if (biterms.total_instances == 0) throw std::invalid_argument("biterm set is empty");

  std::vector<Instance> instances;
  instances.reserve(biterms.total_instances);
  for (const auto& b : biterms.biterms)
    for (std::uint64_t m = 0; m < b.multiplicity; ++m)
      instances.push_back({b.word_a, b.word_b});

  Rng rng(cfg.seed);
  BtmResult result;
  result.state.counts = TopicCounts::zero(biterms.vocabulary_size, cfg.topics);
  result.state.assignments.resize(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto z = static_cast<std::uint32_t>(rng.uniform_below(cfg.topics));
    result.state.assignments[i] = z;
    add_instance(result.state.counts, instances[i], z);
  }

  // Each biterm instance contributes two word tokens, so the per-topic word
  // total is maintained as 2 * n_z rather than re-summed per draw.
  std::vector<std::int64_t> word_totals(cfg.topics);
  auto refresh_totals = [&] {
    for (std::size_t z = 0; z < cfg.topics; ++z)
      word_totals[z] = 2 * result.state.counts.topic_counts(static_cast<Eigen::Index>(z));
  };
  refresh_totals();

  std::vector<double> conditional(cfg.topics);
  result.retained.reserve(cfg.retained_samples());
  for (std::size_t sweep = 0; sweep < cfg.iterations; ++sweep) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const std::uint32_t old_z = result.state.assignments[i];
      remove_instance(result.state.counts, instances[i], old_z);
      word_totals[old_z] -= 2;
      conditional_from_totals(instances[i].word_a, instances[i].word_b, result.state.counts,
                              word_totals, cfg, biterms.vocabulary_size, conditional);
      const auto z = static_cast<std::uint32_t>(rng.categorical(conditional));
      result.state.assignments[i] = z;
      add_instance(result.state.counts, instances[i], z);
      word_totals[z] += 2;
    }
#ifndef NDEBUG
    result.state.counts.check_invariants(biterms.total_instances);
#endif
    if (sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0)
      result.retained.push_back(result.state.counts);
  }
  return result;
}

std::pair<TopicWordMatrix, TopicDistribution> estimate_distributions(
    const TopicCounts& counts, const BtmConfig& cfg, std::uint64_t total_instances,
    const std::vector<std::string>& words) {
  const auto M = counts.word_topic_counts.rows();
  const auto K = counts.word_topic_counts.cols();
  if (static_cast<Eigen::Index>(words.size()) != M)
    throw std::invalid_argument("word label count does not match vocabulary size");

  TopicWordMatrix phi;
  phi.words = words;
  phi.values.resize(M, K);
  const double m_beta = static_cast<double>(M) * cfg.beta;
  for (Eigen::Index z = 0; z < K; ++z) {
    const double denom = static_cast<double>(counts.word_topic_counts.col(z).sum()) + m_beta;
    for (Eigen::Index w = 0; w < M; ++w)
      phi.values(w, z) = (static_cast<double>(counts.word_topic_counts(w, z)) + cfg.beta) / denom;
  }

  TopicDistribution theta;
  theta.theta.resize(K);
  const double denom = static_cast<double>(total_instances) +
                       static_cast<double>(cfg.topics) * cfg.alpha;
  for (Eigen::Index z = 0; z < K; ++z)
    theta.theta(z) = (static_cast<double>(counts.topic_counts(z)) + cfg.alpha) / denom;
  return {std::move(phi), std::move(theta)};
}

std::pair<TopicWordMatrix, TopicDistribution> estimate_distributions(
    const std::vector<TopicCounts>& retained, const BtmConfig& cfg, std::uint64_t total_instances,
    const std::vector<std::string>& words) {
  if (retained.empty()) throw std::invalid_argument("no retained samples");
  auto [phi, theta] = estimate_distributions(retained.front(), cfg, total_instances, words);
  for (std::size_t s = 1; s < retained.size(); ++s) {
    auto [p, t] = estimate_distributions(retained[s], cfg, total_instances, words);
    phi.values += p.values;
    theta.theta += t.theta;
  }
  phi.values /= static_cast<double>(retained.size());
  theta.theta /= static_cast<double>(retained.size());
  return {std::move(phi), std::move(theta)};
}

std::vector<std::vector<std::uint32_t>> list_top_words(const TopicWordMatrix& matrix,
                                                       std::size_t k) {
  if (k == 0 || k > matrix.word_count())
    throw std::invalid_argument("k must satisfy 1 <= k <= vocabulary size");
  std::vector<std::vector<std::uint32_t>> result(matrix.topic_count());
  std::vector<std::uint32_t> order(matrix.word_count());
  for (std::size_t z = 0; z < matrix.topic_count(); ++z) {
    std::iota(order.begin(), order.end(), 0u);
    const auto col = static_cast<Eigen::Index>(z);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double pa = matrix.values(a, col), pb = matrix.values(b, col);
      if (pa != pb) return pa > pb;
      return a < b;
    });
    result[z].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return result;
}

void save_topic_word_matrix(const std::filesystem::path& path, const TopicWordMatrix& matrix) {
  std::vector<std::string> cols(matrix.topic_count());
  for (std::size_t z = 0; z < cols.size(); ++z) cols[z] = "topic_" + std::to_string(z + 1);
  write_labeled_matrix(path, "word", cols, matrix.words, matrix.values);
}

TopicWordMatrix load_topic_word_matrix(const std::filesystem::path& path) {
  LabeledMatrix m = read_labeled_matrix(path);
  return {std::move(m.labels), std::move(m.values)};
}

void save_topic_distribution(const std::filesystem::path& path, const TopicDistribution& theta) {
  CsvTable table;
  table.header = {"theta"};
  for (Eigen::Index z = 0; z < theta.theta.size(); ++z)
    table.rows.push_back({format_double(theta.theta(z))});
  write_csv(path, table);
}

TopicDistribution load_topic_distribution(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  TopicDistribution theta;
  theta.theta.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    theta.theta(static_cast<Eigen::Index>(i)) = parse_double(table.rows[i][0]);
  return theta;
}

void save_retained_counts(const std::filesystem::path& path,
                          const std::vector<TopicCounts>& retained) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (retained.empty()) throw std::invalid_argument("no retained samples to save");
  const auto M = retained.front().word_topic_counts.rows();
  const auto K = retained.front().word_topic_counts.cols();
  // Header row: sample,word,topic_1..topic_K. Row `word == -1` carries n_z.
  out << "sample,word";
  for (Eigen::Index z = 0; z < K; ++z) out << ",topic_" << (z + 1);
  out << '\n';
  for (std::size_t s = 0; s < retained.size(); ++s) {
    out << s << ",-1";
    for (Eigen::Index z = 0; z < K; ++z) out << ',' << retained[s].topic_counts(z);
    out << '\n';
    for (Eigen::Index w = 0; w < M; ++w) {
      out << s << ',' << w;
      for (Eigen::Index z = 0; z < K; ++z) out << ',' << retained[s].word_topic_counts(w, z);
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<TopicCounts> load_retained_counts(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 3) throw std::runtime_error("bad retained-counts file " + path.string());
  const std::size_t K = table.header.size() - 2;
  std::vector<TopicCounts> retained;
  std::int64_t max_word = -1;
  for (const auto& row : table.rows)
    max_word = std::max<std::int64_t>(max_word, std::stoll(row[1]));
  const std::size_t M = static_cast<std::size_t>(max_word + 1);
  for (const auto& row : table.rows) {
    const auto sample = static_cast<std::size_t>(std::stoull(row[0]));
    if (sample >= retained.size()) retained.resize(sample + 1, TopicCounts::zero(M, K));
    const std::int64_t word = std::stoll(row[1]);
    for (std::size_t z = 0; z < K; ++z) {
      const std::int64_t v = std::stoll(row[z + 2]);
      if (word < 0)
        retained[sample].topic_counts(static_cast<Eigen::Index>(z)) = v;
      else
        retained[sample].word_topic_counts(static_cast<Eigen::Index>(word),
                                           static_cast<Eigen::Index>(z)) = v;
    }
  }
  return retained;
}

}  // namespace topictraj
