#include "topictraj/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "topictraj/csv.hpp"
#include "topictraj/rng.hpp"

namespace topictraj {

void EmbeddingConfig::validate() const {
  if (dimension == 0) throw std::invalid_argument("embedding dimension must be >= 1");
  if (window == 0) throw std::invalid_argument("window must be >= 1");
  if (negatives == 0) throw std::invalid_argument("negatives must be >= 1");
  if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
  if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (unigram_power <= 0.0) throw std::invalid_argument("unigram power must be positive");
}

std::vector<std::size_t> context_window(const std::vector<std::uint32_t>& doc,
                                        std::size_t center, std::size_t window) {
  if (center >= doc.size()) throw std::out_of_range("center position out of range");
  std::vector<std::size_t> positions;
  const std::size_t lo = center >= window ? center - window : 0;
  const std::size_t hi = std::min(doc.size(), center + window + 1);
  for (std::size_t p = lo; p < hi; ++p)
    if (p != center) positions.push_back(p);
  return positions;
}

static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sgns_pair_loss(const EmbeddingModel& model, std::uint32_t center, std::uint32_t context,
                      std::span<const std::uint32_t> negatives) {
  const auto in = model.input_vectors.row(center);
  double loss = -std::log(sigmoid(model.context_vectors.row(context).dot(in)));
  for (std::uint32_t n : negatives)
    loss -= std::log(sigmoid(-model.context_vectors.row(n).dot(in)));
  return loss;
}

SgnsGradients sgns_pair_gradients(const EmbeddingModel& model, std::uint32_t center,
                                  std::uint32_t context,
                                  std::span<const std::uint32_t> negatives) {
  const auto in = model.input_vectors.row(center);
  SgnsGradients g;
  const double pos_err = sigmoid(model.context_vectors.row(context).dot(in)) - 1.0;
  g.d_input = pos_err * model.context_vectors.row(context).transpose();
  g.d_context = pos_err * in.transpose();
  g.d_negatives.reserve(negatives.size());
  for (std::uint32_t n : negatives) {
    const double neg_err = sigmoid(model.context_vectors.row(n).dot(in));
    g.d_input += neg_err * model.context_vectors.row(n).transpose();
    g.d_negatives.push_back(neg_err * in.transpose());
  }
  return g;
}

namespace {

// Cumulative unigram^power table for negative draws.
struct NegativeSampler {
  std::vector<double> cumulative;

  NegativeSampler(const TokenizedCorpus& corpus, double power) {
    std::vector<double> weight(corpus.vocabulary_size(), 0.0);
    for (const auto& doc : corpus.documents)
      for (std::uint32_t t : doc) weight[t] += 1.0;
    cumulative.resize(weight.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
      acc += std::pow(weight[i], power);
      cumulative[i] = acc;
    }
  }

  std::uint32_t draw(Rng& rng, std::uint32_t exclude) const {
    for (;;) {
      const double u = rng.uniform() * cumulative.back();
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const auto idx = static_cast<std::uint32_t>(it - cumulative.begin());
      if (idx != exclude) return idx;
    }
  }
};

// One SGD step for a (center, context) pair; the gradient math mirrors
// sgns_pair_gradients but updates in place without allocating.
void sgd_step(EmbeddingModel& model, std::uint32_t center, std::uint32_t context,
              const NegativeSampler& sampler, std::size_t negatives, double lr, Rng& rng,
              std::vector<double>& input_delta) {
  const std::size_t d = model.dimension;
  double* in = model.input_vectors.row(center).data();
  input_delta.assign(d, 0.0);

  double* ctx = model.context_vectors.row(context).data();
  double dot = 0.0;
  for (std::size_t k = 0; k < d; ++k) dot += ctx[k] * in[k];
  double err = sigmoid(dot) - 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    input_delta[k] += err * ctx[k];
    ctx[k] -= lr * err * in[k];
  }
  for (std::size_t s = 0; s < negatives; ++s) {
    const std::uint32_t n = sampler.draw(rng, context);
    double* neg = model.context_vectors.row(n).data();
    dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += neg[k] * in[k];
    err = sigmoid(dot);
    for (std::size_t k = 0; k < d; ++k) {
      input_delta[k] += err * neg[k];
      neg[k] -= lr * err * in[k];
    }
  }
  for (std::size_t k = 0; k < d; ++k) in[k] -= lr * input_delta[k];
}

void train_range(EmbeddingModel& model, const TokenizedCorpus& corpus, const EmbeddingConfig& cfg,
                 const NegativeSampler& sampler, std::size_t doc_begin, std::size_t doc_end,
                 Rng rng, std::atomic<std::uint64_t>& global_progress,
                 std::uint64_t total_tokens) {
  std::vector<double> scratch(cfg.dimension);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t di = doc_begin; di < doc_end; ++di) {
      const auto& doc = corpus.documents[di];
      for (std::size_t pos = 0; pos < doc.size(); ++pos) {
        const std::uint64_t done = global_progress.fetch_add(1, std::memory_order_relaxed);
        const double frac = static_cast<double>(done) / static_cast<double>(total_tokens);
        const double lr =
            cfg.learning_rate * std::max(cfg.min_learning_rate_fraction, 1.0 - frac);
        for (std::size_t ctx_pos : context_window(doc, pos, cfg.window))
          sgd_step(model, doc[pos], doc[ctx_pos], sampler, cfg.negatives, lr, rng, scratch);
      }
    }
  }
}

}  // namespace

EmbeddingModel train_embeddings(const TokenizedCorpus& corpus, const EmbeddingConfig& cfg,
                                std::uint64_t seed) {
  cfg.validate();
  const std::size_t vocab = corpus.vocabulary_size();
  if (vocab < 2) throw std::invalid_argument("corpus needs at least 2 distinct tokens");

  EmbeddingModel model;
  model.dimension = cfg.dimension;
  model.window = cfg.window;
  model.negatives = cfg.negatives;
  model.input_vectors.resize(static_cast<Eigen::Index>(vocab),
                             static_cast<Eigen::Index>(cfg.dimension));
  model.context_vectors.setZero(static_cast<Eigen::Index>(vocab),
                                static_cast<Eigen::Index>(cfg.dimension));
  Rng init_rng(Rng::mix(seed, 0x1d1));
  const double half_width = 0.5 / static_cast<double>(cfg.dimension);
  for (Eigen::Index r = 0; r < model.input_vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < model.input_vectors.cols(); ++c)
      model.input_vectors(r, c) = init_rng.uniform(-half_width, half_width);

  const NegativeSampler sampler(corpus, cfg.unigram_power);
  std::uint64_t total_tokens = 0;
  for (const auto& doc : corpus.documents) total_tokens += doc.size();
  total_tokens *= cfg.epochs;
  std::atomic<std::uint64_t> progress{0};

  const std::size_t workers = std::max<std::size_t>(1, cfg.threads);
  if (workers == 1 || corpus.documents.size() < 2 * workers) {
    train_range(model, corpus, cfg, sampler, 0, corpus.documents.size(),
                Rng(Rng::mix(seed, 0x5d5)), progress, total_tokens);
    return model;
  }

  // Hogwild-style sharded training: workers update shared rows without
  // locking, which trades determinism for throughput.
  std::vector<std::thread> threads;
  const std::size_t shard = (corpus.documents.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * shard;
    const std::size_t end = std::min(corpus.documents.size(), begin + shard);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end, w] {
      train_range(model, corpus, cfg, sampler, begin, end, Rng(Rng::mix(seed, 0x5d5 + w)),
                  progress, total_tokens);
    });
  }
  for (auto& t : threads) t.join();
  return model;
}

std::vector<std::pair<std::uint32_t, double>> nearest_neighbors(const EmbeddingModel& model,
                                                                std::uint32_t word,
                                                                std::size_t k) {
  const auto rows = static_cast<std::uint32_t>(model.input_vectors.rows());
  if (word >= rows) throw std::out_of_range("word index out of range");
  const auto target = model.input_vectors.row(word);
  const double target_norm = target.norm();
  std::vector<std::pair<std::uint32_t, double>> scored;
  scored.reserve(rows - 1);
  for (std::uint32_t w = 0; w < rows; ++w) {
    if (w == word) continue;
    const auto row = model.input_vectors.row(w);
    const double denom = target_norm * row.norm();
    const double cosine = denom > 0.0 ? target.dot(row) / denom : 0.0;
    scored.emplace_back(w, cosine);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

ExpansionResult expand_vocabulary(const EmbeddingModel& model, const Vocabulary& corpus_vocab,
                                  const std::vector<std::string>& keywords, std::size_t k) {
  ExpansionResult result;
  for (const auto& keyword : keywords) {
    const auto idx = corpus_vocab.lookup(keyword);
    if (!idx) {
      result.skipped_keywords.push_back(keyword);
      continue;
    }
    result.vocabulary.add(keyword);
    for (const auto& [neighbor, cosine] : nearest_neighbors(model, *idx, k))
      result.vocabulary.add(corpus_vocab.word(neighbor));
  }
  return result;
}

void save_embedding_model(const std::filesystem::path& path, const EmbeddingModel& model,
                          const Vocabulary& vocab) {
  if (static_cast<Eigen::Index>(vocab.size()) != model.input_vectors.rows())
    throw std::invalid_argument("vocabulary size does not match embedding rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << vocab.size() << ' ' << model.dimension << ' ' << model.window << ' ' << model.negatives
      << '\n';
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    out << vocab.word(static_cast<std::uint32_t>(w));
    const auto r = static_cast<Eigen::Index>(w);
    for (Eigen::Index c = 0; c < model.input_vectors.cols(); ++c)
      out << ' ' << format_double(model.input_vectors(r, c));
    for (Eigen::Index c = 0; c < model.context_vectors.cols(); ++c)
      out << ' ' << format_double(model.context_vectors(r, c));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

EmbeddingModel load_embedding_model(const std::filesystem::path& path, Vocabulary& vocab_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::size_t rows = 0;
  EmbeddingModel model;
  in >> rows >> model.dimension >> model.window >> model.negatives;
  if (!in || rows == 0 || model.dimension == 0)
    throw std::runtime_error("bad embedding header in " + path.string());
  model.input_vectors.resize(static_cast<Eigen::Index>(rows),
                             static_cast<Eigen::Index>(model.dimension));
  model.context_vectors.resize(static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(model.dimension));
  vocab_out = Vocabulary();
  for (std::size_t w = 0; w < rows; ++w) {
    std::string token;
    in >> token;
    vocab_out.add(token);
    const auto r = static_cast<Eigen::Index>(w);
    for (Eigen::Index c = 0; c < model.input_vectors.cols(); ++c) in >> model.input_vectors(r, c);
    for (Eigen::Index c = 0; c < model.context_vectors.cols(); ++c)
      in >> model.context_vectors(r, c);
  }
  if (!in) throw std::runtime_error("truncated embedding file " + path.string());
  return model;
}

}  // namespace topictraj
