#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "core/environment.hpp"
#include "core/observers.hpp"

namespace cogrid {

// Fixed random recurrent network. Recurrent weights are standard normal
// rescaled so the largest eigenvalue magnitude matches the target spectral
// radius; input weights are standard normal scaled by 1/sqrt(input_dim).
struct Reservoir {
  Eigen::MatrixXd recurrent;  // N x N
  Eigen::MatrixXd input;      // N x input_dim
  Eigen::VectorXd initial_state;
  double spectral_radius = 0.9;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(recurrent.rows()); }
  int input_dim() const { return static_cast<int>(input.cols()); }
};

// Linear readout emitting per-step belief updates (C*R values).
struct Readout {
  Eigen::MatrixXd weights;  // (C*R) x N
  Eigen::VectorXd bias;     // C*R
  double ridge = 1e-4;
};

// Largest eigenvalue magnitude estimated by power iteration (geometric mean
// of consecutive growth ratios, robust to complex dominant pairs). Throws if
// it fails to settle within 10^4 iterations.
double estimate_spectral_radius(const Eigen::MatrixXd& m);

Reservoir init_reservoir(std::uint64_t seed, int N, int input_dim, double spectral_radius);

// Flattened interaction input for the network: all off-diagonal couplings,
// except at C = 1 where the self couplings are used (the likelihood depends
// on them, so the readout needs them to track the optimal observer).
Eigen::VectorXd interaction_input(const InteractionSet& interactions);
int esn_input_dim(int d_o, int C);

// x_{t+1} = tanh(W_rec x_t + W_in u_t), u_t = concat(o_t, z); returns T x N.
Eigen::MatrixXd drive(const Reservoir& res, const Episode& episode,
                      const Eigen::VectorXd* initial_state = nullptr);

// Per-step increments of the Joint observer's log marginal beliefs,
// flattened row-major over (variable, realization); returns T x (C*R).
Eigen::MatrixXd joint_log_increment_targets(const Episode& episode);

// Streaming accumulator for the closed-form ridge solution on centered data.
class ReadoutFitter {
 public:
  ReadoutFitter(int state_dim, int target_dim);
  void add(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets);
  void merge(const ReadoutFitter& other);
  Readout solve(double ridge) const;

 private:
  Eigen::MatrixXd gram_;        // N x N
  Eigen::MatrixXd cross_;       // N x targets
  Eigen::VectorXd sum_states_;
  Eigen::VectorXd sum_targets_;
  std::int64_t count_ = 0;
};

Readout fit_readout(const std::vector<Eigen::MatrixXd>& states_batch,
                    const std::vector<Eigen::MatrixXd>& targets_batch, double ridge);

struct EsnEvaluation {
  Eigen::VectorXd accuracy;  // length T+1
  std::vector<BeliefTrajectory> trajectories;
};

// Accumulate readout increments over time, softmax per variable. When
// oracle_targets is true the true Joint log increments are fed through the
// same accumulation path instead of the readout predictions.
EsnEvaluation evaluate_esn(const Reservoir& res, const Readout& readout,
                           const std::vector<Episode>& episodes, bool oracle_targets = false);

}  // namespace cogrid
