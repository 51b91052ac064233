#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/observers.hpp"

namespace cogrid {

// D_KL(p || q) over discrete vectors; 0 ln 0 := 0, q floored at 1e-300.
double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// KL from the Joint observer's goal marginal to the Naive observer's.
double factorization_regret(const Eigen::VectorXd& joint_goal, const Eigen::VectorXd& naive_goal);

double jeffreys_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Fraction of episodes whose MAP action at step t hits a*, per t.
Eigen::VectorXd accuracy_curve(const std::vector<BeliefTrajectory>& trajectories,
                               const std::vector<int>& optimal_actions);

// Elementwise a/b with the denominator floored at chance (1/R).
Eigen::VectorXd relative_accuracy(const Eigen::VectorXd& curve_a, const Eigen::VectorXd& curve_b, int R);

struct Histogram {
  Eigen::VectorXd density;  // integrates to 1 over [0, 1]
  int bins = 50;

  double bin_width() const { return 1.0 / bins; }
  // Probability mass strictly below the threshold (partial bins prorated).
  double mass_below(double threshold) const;
};

// Density of B_{tg}(a*) pooled over episodes at step t.
Histogram hit_distribution(const std::vector<BeliefTrajectory>& trajectories,
                           const std::vector<int>& optimal_actions, int t, int bins = 50);

// Jeffreys divergence between the naive marginal likelihood of o_t and the
// history-conditioned likelihood ratio B_{t+1}/B_t from the Joint trajectory,
// for update steps t = 1..T-1 (the first update is excluded; the two
// coincide there by single-observation equivalence).
Eigen::VectorXd disentanglement(const BeliefTrajectory& joint_traj,
                                const std::vector<Eigen::MatrixXd>& naive_ell, const Episode& episode);

// (sum lambda)^2 / sum lambda^2 over eigenvalues of the sample covariance;
// all-constant input yields 1.
double participation_ratio(const Eigen::MatrixXd& states);

}  // namespace cogrid
