#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/environment.hpp"

namespace cogrid {

enum class ObserverKind { Joint, Naive };

// Full joint posterior over R^C realizations, kept in log space and
// renormalized (logsumexp == 0) after every update.
struct JointBelief {
  Eigen::VectorXd log_post;
  int R = 0;
  int C = 0;

  static JointBelief uniform(int R, int C);
};

// Independent per-variable marginals, one probability row per variable.
struct MarginalBeliefs {
  Eigen::MatrixXd B;  // C x R

  static MarginalBeliefs uniform(int C, int R);
};

// T+1 belief snapshots (row 0 is the uniform prior). goal holds the goal
// variable's marginal; marginals holds every variable's marginal.
struct BeliefTrajectory {
  Eigen::MatrixXd goal;                  // (T+1) x R
  std::vector<Eigen::MatrixXd> marginals;  // T+1 entries, each C x R
  ObserverKind kind = ObserverKind::Joint;
};

double logsumexp(const Eigen::VectorXd& x);

void joint_update(JointBelief& belief, const Eigen::VectorXi& obs, const LikelihoodTensor& ell);

Eigen::VectorXd joint_goal_marginal(const JointBelief& belief, int g);

// Independent per-variable update with the marginalized likelihoods
// (naive_ell: one d_o x R matrix per variable).
void naive_update(MarginalBeliefs& marginals, const Eigen::VectorXi& obs,
                  const std::vector<Eigen::MatrixXd>& naive_ell);

BeliefTrajectory run_trajectory(const Episode& episode, ObserverKind kind);

// Argmax with lowest-index tie-break.
int map_action(const Eigen::VectorXd& goal_belief);

}  // namespace cogrid
