#include "core/observers.hpp"

#include <cmath>

namespace cogrid {

namespace {
constexpr double kLogFloor = -690.77552789821368;  // ln(1e-300)

inline double safe_log(double p) { return std::max(std::log(p), kLogFloor); }
}  // namespace

double logsumexp(const Eigen::VectorXd& x) {
  double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

JointBelief JointBelief::uniform(int R, int C) {
  JointBelief b;
  b.R = R;
  b.C = C;
  std::size_t cells = 1;
  for (int c = 0; c < C; ++c) cells *= static_cast<std::size_t>(R);
  b.log_post = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cells),
                                         -std::log(static_cast<double>(cells)));
  return b;
}

MarginalBeliefs MarginalBeliefs::uniform(int C, int R) {
  MarginalBeliefs m;
  m.B = Eigen::MatrixXd::Constant(C, R, 1.0 / R);
  return m;
}

void joint_update(JointBelief& belief, const Eigen::VectorXi& obs, const LikelihoodTensor& ell) {
  for (int i = 0; i < ell.d_o; ++i) {
    const Eigen::VectorXd& li = ell.ell[i];
    if (obs(i) == 1) {
      belief.log_post += li.unaryExpr([](double p) { return safe_log(p); });
    } else {
      belief.log_post += li.unaryExpr([](double p) { return safe_log(1.0 - p); });
    }
  }
  belief.log_post.array() -= logsumexp(belief.log_post);
}

Eigen::VectorXd joint_goal_marginal(const JointBelief& belief, int g) {
  const int R = belief.R;
  std::size_t stride = 1;
  for (int k = belief.C - 1; k > g; --k) stride *= static_cast<std::size_t>(R);
  Eigen::VectorXd marg = Eigen::VectorXd::Zero(R);
  const std::size_t cells = static_cast<std::size_t>(belief.log_post.size());
  for (std::size_t idx = 0; idx < cells; ++idx) {
    int r = static_cast<int>(idx / stride % static_cast<std::size_t>(R));
    marg(r) += std::exp(belief.log_post(static_cast<Eigen::Index>(idx)));
  }
  return marg / marg.sum();
}

void naive_update(MarginalBeliefs& marginals, const Eigen::VectorXi& obs,
                  const std::vector<Eigen::MatrixXd>& naive_ell) {
  const int C = static_cast<int>(marginals.B.rows());
  const int R = static_cast<int>(marginals.B.cols());
  for (int c = 0; c < C; ++c) {
    Eigen::VectorXd logb(R);
    for (int r = 0; r < R; ++r) logb(r) = safe_log(marginals.B(c, r));
    const Eigen::MatrixXd& m = naive_ell[c];  // d_o x R
    for (int i = 0; i < m.rows(); ++i) {
      for (int r = 0; r < R; ++r) {
        logb(r) += obs(i) == 1 ? safe_log(m(i, r)) : safe_log(1.0 - m(i, r));
      }
    }
    logb.array() -= logsumexp(logb);
    for (int r = 0; r < R; ++r) marginals.B(c, r) = std::exp(logb(r));
  }
}

BeliefTrajectory run_trajectory(const Episode& episode, ObserverKind kind) {
  const int C = episode.likelihood.C;
  const int R = episode.likelihood.R;
  const int T = static_cast<int>(episode.observations.rows());

  BeliefTrajectory traj;
  traj.kind = kind;
  traj.goal.resize(T + 1, R);
  traj.marginals.reserve(T + 1);
  traj.marginals.push_back(Eigen::MatrixXd::Constant(C, R, 1.0 / R));
  traj.goal.row(0).setConstant(1.0 / R);

  if (kind == ObserverKind::Joint) {
    JointBelief belief = JointBelief::uniform(R, C);
    for (int t = 0; t < T; ++t) {
      joint_update(belief, episode.observations.row(t), episode.likelihood);
      Eigen::MatrixXd snap(C, R);
      for (int c = 0; c < C; ++c) snap.row(c) = joint_goal_marginal(belief, c);
      traj.goal.row(t + 1) = snap.row(episode.goal);
      traj.marginals.push_back(std::move(snap));
    }
  } else {
    std::vector<Eigen::MatrixXd> naive_ell;
    naive_ell.reserve(C);
    for (int c = 0; c < C; ++c) naive_ell.push_back(marginal_likelihood(episode.likelihood, c));
    MarginalBeliefs beliefs = MarginalBeliefs::uniform(C, R);
    for (int t = 0; t < T; ++t) {
      naive_update(beliefs, episode.observations.row(t), naive_ell);
      traj.goal.row(t + 1) = beliefs.B.row(episode.goal);
      traj.marginals.push_back(beliefs.B);
    }
  }
  return traj;
}

int map_action(const Eigen::VectorXd& goal_belief) {
  int best = 0;
  for (int r = 1; r < goal_belief.size(); ++r) {
    if (goal_belief(r) > goal_belief(best)) best = r;
  }
  return best;
}

}  // namespace cogrid
