#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "core/environment.hpp"

namespace cogrid {

struct PreferenceSpec {
  Eigen::VectorXd omega;  // length d_o, entries in [0, 1]
  std::uint64_t seed = 0;
};

// Omega drawn per dimension, binary {0,1} by default.
PreferenceSpec sample_preferences(std::uint64_t seed, int d_o, bool binary = true);

enum class LandscapeSource { Oracle, Empirical };

// Intrinsic reward over all R^C joint realizations.
struct PreferenceLandscape {
  Eigen::VectorXd reward;  // length R^C, row-major over (r_1, ..., r_C)
  LandscapeSource source = LandscapeSource::Oracle;
  int R = 0;
  int C = 0;

  int argmax() const;
};

// exp of the mean preference-weighted log-Bernoulli over observation
// dimensions; likelihoods clipped into [1e-3, 1 - 1e-3] before the log.
double intrinsic_reward(const std::vector<int>& r, const PreferenceSpec& omega, const LikelihoodTensor& ell);

// Oracle: ground-truth likelihoods. Empirical: per-cell likelihood estimates
// from averaging `draws` observations of set_state_and_observe (online
// condition), clipped the same way.
PreferenceLandscape build_landscape(const PreferenceSpec& omega, const LikelihoodTensor& ell,
                                    LandscapeSource kind, int draws = 30, std::uint64_t seed = 0);

struct A2cConfig {
  double lr = 0.005;
  double beta = 0.05;
  double beta_decay = 0.999;
  int episodes = 2000;
  int batch = 1024;
  bool adam = false;  // plain gradient descent by default
  std::uint64_t seed = 0;
};

// Tabular softmax actor over R^C logits plus a scalar critic.
struct PolicyParams {
  Eigen::VectorXd logits;
  double value = 0.0;
  double beta = 0.05;
  double lr = 0.005;

  Eigen::VectorXd probabilities() const;
  double entropy() const;
  int greedy_action() const;
};

struct A2cDiagnostics {
  double mean_advantage = 0.0;
  double mean_reward = 0.0;
  double entropy = 0.0;
};

// Loss with the advantages detached (treated as constants), as minimized by
// one a2c_step; exposed so tests can finite-difference it.
double a2c_loss(const Eigen::VectorXd& logits, double value, const std::vector<int>& actions,
                const Eigen::VectorXd& rewards, const Eigen::VectorXd& detached_advantages, double beta);

A2cDiagnostics a2c_step(PolicyParams& policy, const PreferenceLandscape& landscape, Rng& rng, int batch,
                        double beta_decay = 0.999, bool adam = false, Eigen::VectorXd* adam_m = nullptr,
                        Eigen::VectorXd* adam_v = nullptr, int* adam_t = nullptr);

// R(argmax_r pi, ...) / max_r R(...) against the ground-truth landscape.
double normalized_performance(const PolicyParams& policy, const PreferenceLandscape& true_landscape);

struct TrainingResult {
  PolicyParams policy;
  Eigen::VectorXd performance;  // per episode, against the true landscape
  Eigen::VectorXd entropy;      // per episode
  std::vector<int> greedy_log;  // greedy action every 50 episodes
};

TrainingResult train_controller(const A2cConfig& cfg, const PreferenceLandscape& landscape,
                                const PreferenceLandscape& true_landscape);

}  // namespace cogrid
