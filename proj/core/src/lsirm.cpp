#include "topictraj/lsirm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "topictraj/align.hpp"
#include "topictraj/csv.hpp"
#include "topictraj/rng.hpp"

namespace topictraj {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
  Eigen::MatrixXd D(U.rows(), V.rows());
  for (Eigen::Index j = 0; j < U.rows(); ++j)
    for (Eigen::Index i = 0; i < V.rows(); ++i) D(j, i) = (U.row(j) - V.row(i)).norm();
  return D;
}

}  // namespace

void LsirmConfig::validate() const {
  if (latent_dim == 0) throw std::invalid_argument("latent dimension must be >= 1");
  if (iterations == 0) throw std::invalid_argument("iterations must be positive");
  if (burn_in >= iterations) throw std::invalid_argument("burn-in must be < iterations");
  if (thin == 0) throw std::invalid_argument("thin must be >= 1");
  if (proposal_sd_beta <= 0.0 || proposal_sd_theta <= 0.0 || proposal_sd_position <= 0.0)
    throw std::invalid_argument("proposal sds must be positive");
  if (tau2_beta <= 0.0) throw std::invalid_argument("tau2_beta must be positive");
  if (a_sigma <= 0.0 || b_sigma <= 0.0 || a_sigma_theta <= 0.0 || b_sigma_theta <= 0.0)
    throw std::invalid_argument("inverse-gamma shapes and scales must be positive");
}

double lsirm_log_likelihood(const Eigen::MatrixXd& X, const LsirmState& state) {
  if (state.sigma2 <= 0.0) throw std::invalid_argument("sigma2 must be positive");
  if (X.rows() != state.theta.size() || X.cols() != state.beta.size())
    throw std::invalid_argument("data dimensions do not match state dimensions");
  const Eigen::MatrixXd D = pairwise_distances(state.word_positions, state.topic_positions);
  double ssr = 0.0;
  for (Eigen::Index j = 0; j < X.rows(); ++j)
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
      const double r = X(j, i) - (state.theta(j) + state.beta(i) - D(j, i));
      ssr += r * r;
    }
  const double n = static_cast<double>(X.size());
  return -0.5 * n * (kLogTwoPi + std::log(state.sigma2)) - ssr / (2.0 * state.sigma2);
}

double lsirm_log_posterior(const Eigen::MatrixXd& X, const LsirmState& state,
                           const LsirmConfig& cfg) {
  double lp = lsirm_log_likelihood(X, state);
  const auto N = state.theta.size();
  const auto P = state.beta.size();
  lp += -0.5 * static_cast<double>(N) * (kLogTwoPi + std::log(state.sigma2_theta)) -
        state.theta.squaredNorm() / (2.0 * state.sigma2_theta);
  lp += -0.5 * static_cast<double>(P) * (kLogTwoPi + std::log(cfg.tau2_beta)) -
        state.beta.squaredNorm() / (2.0 * cfg.tau2_beta);
  lp += -0.5 * static_cast<double>(state.word_positions.size()) * kLogTwoPi -
        0.5 * state.word_positions.squaredNorm();
  lp += -0.5 * static_cast<double>(state.topic_positions.size()) * kLogTwoPi -
        0.5 * state.topic_positions.squaredNorm();
  // Inverse-gamma log densities for sigma2 and sigma2_theta, constants dropped.
  lp += -(cfg.a_sigma + 1.0) * std::log(state.sigma2) - cfg.b_sigma / state.sigma2;
  lp += -(cfg.a_sigma_theta + 1.0) * std::log(state.sigma2_theta) -
        cfg.b_sigma_theta / state.sigma2_theta;
  return lp;
}

LsirmChain run_lsirm_mcmc(const Eigen::MatrixXd& X, const LsirmConfig& cfg) {
  cfg.validate();
  const auto N = X.rows();
  const auto P = X.cols();
  if (N < 2 || P < 2) throw std::invalid_argument("LSIRM needs at least a 2x2 matrix");
  if (!X.allFinite()) throw std::invalid_argument("input matrix contains non-finite values");
  const auto d = static_cast<Eigen::Index>(cfg.latent_dim);

  Rng rng(cfg.seed);
  LsirmState state;
  bool initialized = false;
  for (std::size_t attempt = 0; attempt < cfg.init_retries; ++attempt) {
    state.theta.resize(N);
    state.beta.resize(P);
    state.word_positions.resize(N, d);
    state.topic_positions.resize(P, d);
    for (Eigen::Index j = 0; j < N; ++j) state.theta(j) = rng.normal(0.0, cfg.init_sd);
    for (Eigen::Index i = 0; i < P; ++i) state.beta(i) = rng.normal(0.0, cfg.init_sd);
    for (Eigen::Index j = 0; j < N; ++j)
      for (Eigen::Index k = 0; k < d; ++k) state.word_positions(j, k) = rng.normal(0.0, cfg.init_sd);
    for (Eigen::Index i = 0; i < P; ++i)
      for (Eigen::Index k = 0; k < d; ++k)
        state.topic_positions(i, k) = rng.normal(0.0, cfg.init_sd);
    state.sigma2 = 1.0;
    state.sigma2_theta = 1.0;
    if (std::isfinite(lsirm_log_posterior(X, state, cfg))) {
      initialized = true;
      break;
    }
  }
  if (!initialized)
    throw std::runtime_error("could not find a finite-posterior initial state");

  Eigen::MatrixXd D = pairwise_distances(state.word_positions, state.topic_positions);
  Eigen::MatrixXd R = X;
  auto refresh_residuals = [&] {
    for (Eigen::Index j = 0; j < N; ++j)
      for (Eigen::Index i = 0; i < P; ++i)
        R(j, i) = X(j, i) - (state.theta(j) + state.beta(i) - D(j, i));
  };
  refresh_residuals();

  LsirmChain chain;
  chain.samples.reserve(cfg.retained_samples());
  chain.log_posterior.reserve(cfg.retained_samples());
  std::uint64_t acc_theta = 0, acc_beta = 0, acc_u = 0, acc_v = 0;

  Eigen::VectorXd new_row_dist(P), new_col_dist(N), proposal(d);
  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    // theta block
    for (Eigen::Index j = 0; j < N; ++j) {
      const double prop = state.theta(j) + rng.normal(0.0, cfg.proposal_sd_theta);
      const double delta = prop - state.theta(j);
      double dll = 0.0;
      for (Eigen::Index i = 0; i < P; ++i) dll += 2.0 * R(j, i) * delta - delta * delta;
      dll /= 2.0 * state.sigma2;
      dll += (state.theta(j) * state.theta(j) - prop * prop) / (2.0 * state.sigma2_theta);
      if (mh_accept(dll, rng)) {
        state.theta(j) = prop;
        R.row(j).array() -= delta;
        ++acc_theta;
      }
    }
    // beta block
    for (Eigen::Index i = 0; i < P; ++i) {
      const double prop = state.beta(i) + rng.normal(0.0, cfg.proposal_sd_beta);
      const double delta = prop - state.beta(i);
      double dll = 0.0;
      for (Eigen::Index j = 0; j < N; ++j) dll += 2.0 * R(j, i) * delta - delta * delta;
      dll /= 2.0 * state.sigma2;
      dll += (state.beta(i) * state.beta(i) - prop * prop) / (2.0 * cfg.tau2_beta);
      if (mh_accept(dll, rng)) {
        state.beta(i) = prop;
        R.col(i).array() -= delta;
        ++acc_beta;
      }
    }
    // word position rows; mu = theta + beta - dist, so residuals move by +d(dist)
    for (Eigen::Index j = 0; j < N; ++j) {
      for (Eigen::Index k = 0; k < d; ++k)
        proposal(k) = state.word_positions(j, k) + rng.normal(0.0, cfg.proposal_sd_position);
      double dll = 0.0;
      for (Eigen::Index i = 0; i < P; ++i) {
        new_row_dist(i) = (proposal.transpose() - state.topic_positions.row(i)).norm();
        const double new_r = R(j, i) + (new_row_dist(i) - D(j, i));
        dll += (R(j, i) * R(j, i) - new_r * new_r);
      }
      dll /= 2.0 * state.sigma2;
      dll += 0.5 * (state.word_positions.row(j).squaredNorm() - proposal.squaredNorm());
      if (mh_accept(dll, rng)) {
        R.row(j) += (new_row_dist.transpose() - D.row(j));
        D.row(j) = new_row_dist.transpose();
        state.word_positions.row(j) = proposal.transpose();
        ++acc_u;
      }
    }
    // topic position rows
    for (Eigen::Index i = 0; i < P; ++i) {
      for (Eigen::Index k = 0; k < d; ++k)
        proposal(k) = state.topic_positions(i, k) + rng.normal(0.0, cfg.proposal_sd_position);
      double dll = 0.0;
      for (Eigen::Index j = 0; j < N; ++j) {
        new_col_dist(j) = (state.word_positions.row(j) - proposal.transpose()).norm();
        const double new_r = R(j, i) + (new_col_dist(j) - D(j, i));
        dll += (R(j, i) * R(j, i) - new_r * new_r);
      }
      dll /= 2.0 * state.sigma2;
      dll += 0.5 * (state.topic_positions.row(i).squaredNorm() - proposal.squaredNorm());
      if (mh_accept(dll, rng)) {
        R.col(i) += (new_col_dist - D.col(i));
        D.col(i) = new_col_dist;
        state.topic_positions.row(i) = proposal.transpose();
        ++acc_v;
      }
    }
    // conjugate variance updates
    state.sigma2_theta = rng.inverse_gamma(cfg.a_sigma_theta + static_cast<double>(N) / 2.0,
                                           cfg.b_sigma_theta + state.theta.squaredNorm() / 2.0);
    state.sigma2 = rng.inverse_gamma(cfg.a_sigma + static_cast<double>(N * P) / 2.0,
                                     cfg.b_sigma + R.squaredNorm() / 2.0);
    refresh_residuals();  // guards against incremental drift

    if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
      chain.samples.push_back(state);
      chain.log_posterior.push_back(lsirm_log_posterior(X, state, cfg));
    }
  }

  const double iters = static_cast<double>(cfg.iterations);
  chain.acceptance.theta = static_cast<double>(acc_theta) / (iters * static_cast<double>(N));
  chain.acceptance.beta = static_cast<double>(acc_beta) / (iters * static_cast<double>(P));
  chain.acceptance.word_positions =
      static_cast<double>(acc_u) / (iters * static_cast<double>(N));
  chain.acceptance.topic_positions =
      static_cast<double>(acc_v) / (iters * static_cast<double>(P));
  return chain;
}

PositionMatrix extract_positions(const LsirmChain& chain, int level,
                                 LsirmConfig::Reference reference) {
  if (chain.samples.empty()) throw std::invalid_argument("chain has no retained samples");

  std::size_t ref_index = chain.samples.size() - 1;
  if (reference == LsirmConfig::Reference::highest_log_posterior) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < chain.log_posterior.size(); ++s) {
      if (chain.log_posterior[s] > best) {
        best = chain.log_posterior[s];
        ref_index = s;
      }
    }
  }

  const auto stack_centered = [](const LsirmState& s) {
    Eigen::MatrixXd joint(s.word_positions.rows() + s.topic_positions.rows(),
                          s.word_positions.cols());
    joint << s.word_positions, s.topic_positions;
    joint.rowwise() -= joint.colwise().mean();
    return joint;
  };

  const Eigen::MatrixXd reference_joint = stack_centered(chain.samples[ref_index]);
  if (reference_joint.cwiseAbs().maxCoeff() < 1e-14)
    throw std::runtime_error("degenerate Procrustes reference: all positions identical");

  const auto P = chain.samples.front().topic_positions.rows();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(P, reference_joint.cols());
  for (const auto& sample : chain.samples) {
    const Eigen::MatrixXd joint = stack_centered(sample);
    const Eigen::MatrixXd rotation = orthogonal_procrustes_rotation(joint, reference_joint);
    const Eigen::MatrixXd aligned = joint * rotation;
    mean += aligned.bottomRows(P);
  }
  mean /= static_cast<double>(chain.samples.size());
  return PositionMatrix{std::move(mean), level};
}

void save_position_matrix(const std::filesystem::path& path, const PositionMatrix& positions) {
  std::vector<std::string> cols(static_cast<std::size_t>(positions.coords.cols()));
  for (std::size_t k = 0; k < cols.size(); ++k) cols[k] = "x_" + std::to_string(k + 1);
  std::vector<std::string> labels(static_cast<std::size_t>(positions.coords.rows()));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = "topic_" + std::to_string(i + 1);
  write_labeled_matrix(path, "topic", cols, labels, positions.coords);
}

PositionMatrix load_position_matrix(const std::filesystem::path& path, int level) {
  LabeledMatrix m = read_labeled_matrix(path);
  return PositionMatrix{std::move(m.values), level};
}

}  // namespace topictraj
