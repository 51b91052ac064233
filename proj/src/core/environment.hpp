#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/latent.hpp"
#include "core/rng.hpp"

namespace cogrid {

struct EnvConfig {
  int S = 500;
  int C = 2;
  int R = 10;
  int T = 30;
  int d_o = 5;
  int d_E = 30;
  double lambda = 2.0;
  std::uint64_t seed = 0;
};

struct Episode {
  std::vector<int> context;       // length C
  std::vector<int> realizations;  // length C, values in [0, R)
  int goal = 0;                   // index into context
  InteractionSet interactions;
  LikelihoodTensor likelihood;
  Eigen::MatrixXi observations;  // T x d_o, entries in {0, 1}
  double lambda = 2.0;
  std::uint64_t seed = 0;

  int optimal_action() const { return realizations[goal]; }
};

// Context uniform without replacement, realizations i.i.d. uniform, goal
// uniform, then T Bernoulli observation rows. The RNG stream is derived from
// (cfg.seed, episode_index) only, so generation is order- and
// worker-independent. An optional variable pool restricts context sampling
// to a declared subset (train/test variable splits).
Episode sample_episode(const EmbeddingSpace& space, const EnvConfig& cfg, std::uint64_t episode_index,
                       const std::vector<int>* variable_pool = nullptr);

// One observation vector for a fixed realization.
Eigen::VectorXi sample_observation(const LikelihoodTensor& ell, const std::vector<int>& r, Rng& rng);

// T i.i.d. observations from a fixed realization (the set-state/observe
// interface used by the online controller).
Eigen::MatrixXi set_state_and_observe(const LikelihoodTensor& ell, const std::vector<int>& r, int T, Rng& rng);

}  // namespace cogrid
