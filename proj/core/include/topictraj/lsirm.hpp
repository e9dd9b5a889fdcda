#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace topictraj {

struct LsirmConfig {
  std::size_t latent_dim = 2;
  std::size_t iterations = 55000;  // total, burn-in included
  std::size_t burn_in = 5000;
  std::size_t thin = 5;

  // Random-walk proposal scales ("jumping rules").
  double proposal_sd_beta = 0.28;
  double proposal_sd_theta = 1.0;
  double proposal_sd_position = 0.06;

  // Priors: beta_i ~ N(0, tau2_beta); theta_j ~ N(0, sigma2_theta) with
  // sigma2_theta ~ IG(a_sigma_theta, b_sigma_theta); sigma2 ~ IG(a_sigma, b_sigma);
  // positions ~ standard d-variate normal.
  double tau2_beta = 1.0;
  double a_sigma = 0.001;
  double b_sigma = 0.001;
  double a_sigma_theta = 0.001;
  double b_sigma_theta = 0.001;

  double init_sd = 0.1;
  std::size_t init_retries = 16;
  std::uint64_t seed = 0;

  enum class Reference { highest_log_posterior, last_sample };
  Reference procrustes_reference = Reference::highest_log_posterior;

  std::size_t retained_samples() const { return (iterations - burn_in + thin - 1) / thin; }
  void validate() const;
};

struct LsirmState {
  Eigen::VectorXd theta;           // N word main effects
  Eigen::VectorXd beta;            // P topic main effects
  Eigen::MatrixXd word_positions;  // N x d
  Eigen::MatrixXd topic_positions; // P x d
  double sigma2 = 1.0;
  double sigma2_theta = 1.0;
};

struct LsirmAcceptance {
  double theta = 0.0;
  double beta = 0.0;
  double word_positions = 0.0;
  double topic_positions = 0.0;
};

struct LsirmChain {
  std::vector<LsirmState> samples;
  std::vector<double> log_posterior;  // one entry per retained sample
  LsirmAcceptance acceptance;
};

// sum_{j,i} log Normal(x_{j,i}; theta_j + beta_i - ||u_j - v_i||, sigma2)
double lsirm_log_likelihood(const Eigen::MatrixXd& X, const LsirmState& state);
double lsirm_log_posterior(const Eigen::MatrixXd& X, const LsirmState& state,
                           const LsirmConfig& cfg);

// Metropolis-Hastings within Gibbs: random-walk updates for theta, beta and
// each latent position row; conjugate inverse-gamma draws for sigma2 and
// sigma2_theta. Deterministic for a fixed seed.
LsirmChain run_lsirm_mcmc(const Eigen::MatrixXd& X, const LsirmConfig& cfg);

struct PositionMatrix {
  Eigen::MatrixXd coords;  // P x d topic coordinates
  int level = 0;           // source word percentage
};

// Centers every retained sample's stacked (U, V) configuration, aligns it to
// the reference sample by orthogonal Procrustes (rotation + reflection, no
// scaling), and returns the posterior mean of the aligned topic positions.
PositionMatrix extract_positions(const LsirmChain& chain, int level,
                                 LsirmConfig::Reference reference =
                                     LsirmConfig::Reference::highest_log_posterior);

void save_position_matrix(const std::filesystem::path& path, const PositionMatrix& positions);
PositionMatrix load_position_matrix(const std::filesystem::path& path, int level);

}  // namespace topictraj
