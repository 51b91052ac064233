#include "core/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace cogrid {

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double kl = 0.0;
  for (Eigen::Index r = 0; r < p.size(); ++r) {
    if (p(r) <= 0.0) continue;
    kl += p(r) * (std::log(p(r)) - std::log(std::max(q(r), 1e-300)));
  }
  return kl;
}

double factorization_regret(const Eigen::VectorXd& joint_goal, const Eigen::VectorXd& naive_goal) {
  return kl_divergence(joint_goal, naive_goal);
}

double jeffreys_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return kl_divergence(p, q) + kl_divergence(q, p);
}

Eigen::VectorXd accuracy_curve(const std::vector<BeliefTrajectory>& trajectories,
                               const std::vector<int>& optimal_actions) {
  if (trajectories.empty()) throw std::invalid_argument("accuracy_curve: empty batch");
  const Eigen::Index steps = trajectories[0].goal.rows();
  Eigen::VectorXd curve = Eigen::VectorXd::Zero(steps);
  for (std::size_t e = 0; e < trajectories.size(); ++e) {
    for (Eigen::Index t = 0; t < steps; ++t) {
      if (map_action(trajectories[e].goal.row(t)) == optimal_actions[e]) curve(t) += 1.0;
    }
  }
  return curve / static_cast<double>(trajectories.size());
}

Eigen::VectorXd relative_accuracy(const Eigen::VectorXd& curve_a, const Eigen::VectorXd& curve_b, int R) {
  if (curve_a.size() != curve_b.size()) throw std::invalid_argument("relative_accuracy: length mismatch");
  const double chance = 1.0 / R;
  Eigen::VectorXd out(curve_a.size());
  for (Eigen::Index t = 0; t < curve_a.size(); ++t) out(t) = curve_a(t) / std::max(curve_b(t), chance);
  return out;
}

double Histogram::mass_below(double threshold) const {
  double mass = 0.0;
  const double w = bin_width();
  for (int b = 0; b < bins; ++b) {
    double lo = b * w;
    double hi = lo + w;
    if (hi <= threshold) {
      mass += density(b) * w;
    } else if (lo < threshold) {
      mass += density(b) * (threshold - lo);
    }
  }
  return mass;
}

Histogram hit_distribution(const std::vector<BeliefTrajectory>& trajectories,
                           const std::vector<int>& optimal_actions, int t, int bins) {
  Histogram h;
  h.bins = bins;
  h.density = Eigen::VectorXd::Zero(bins);
  for (std::size_t e = 0; e < trajectories.size(); ++e) {
    double hit = trajectories[e].goal(t, optimal_actions[e]);
    int b = std::min(static_cast<int>(hit * bins), bins - 1);
    h.density(b) += 1.0;
  }
  h.density /= static_cast<double>(trajectories.size()) * h.bin_width();
  return h;
}

Eigen::VectorXd disentanglement(const BeliefTrajectory& joint_traj,
                                const std::vector<Eigen::MatrixXd>& naive_ell, const Episode& episode) {
  if (joint_traj.kind != ObserverKind::Joint)
    throw std::invalid_argument("disentanglement: requires a Joint trajectory");
  const int T = static_cast<int>(episode.observations.rows());
  const int R = episode.likelihood.R;
  const int g = episode.goal;
  const Eigen::MatrixXd& m = naive_ell[g];  // d_o x R

  Eigen::VectorXd out(T - 1);
  for (int t = 1; t < T; ++t) {
    // Naive marginal likelihood of o_t given r_g, normalized.
    Eigen::VectorXd qa(R);
    for (int r = 0; r < R; ++r) {
      double lp = 0.0;
      for (int i = 0; i < m.rows(); ++i) {
        double p = m(i, r);
        lp += episode.observations(t, i) == 1 ? std::log(p) : std::log(1.0 - p);
      }
      qa(r) = lp;
    }
    qa = (qa.array() - logsumexp(qa)).exp();

    // History-conditioned likelihood from the exact Joint belief ratio.
    Eigen::VectorXd qb(R);
    for (int r = 0; r < R; ++r) {
      double prev = joint_traj.goal(t, r);
      if (prev <= 0.0) throw std::logic_error("disentanglement: zero belief entry");
      qb(r) = std::max(joint_traj.goal(t + 1, r) / prev, 1e-300);
    }
    qb /= qb.sum();

    out(t - 1) = jeffreys_divergence(qa, qb);
  }
  return out;
}

double participation_ratio(const Eigen::MatrixXd& states) {
  if (states.rows() < 2) throw std::invalid_argument("participation_ratio: need >= 2 samples");
  Eigen::MatrixXd centered = states.rowwise() - states.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(states.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
  double sum = ev.sum();
  double sumsq = ev.squaredNorm();
  if (sumsq <= 0.0) return 1.0;  // rank-0 guard
  return sum * sum / sumsq;
}

}  // namespace cogrid
