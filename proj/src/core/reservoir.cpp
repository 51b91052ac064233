#include "core/reservoir.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "core/rng.hpp"

namespace cogrid {

double estimate_spectral_radius(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) return 0.0;
  // Block power (orthogonal) iteration on a small subspace. A single power
  // vector stalls when the dominant eigenvalue is a complex pair or nearly
  // tied in magnitude with the runner-up; a 4-column subspace captures those
  // and the estimate is read off the projected matrix's eigenvalues.
  const int p = std::min(4, n);
  Eigen::MatrixXd q(n, p);
  Rng rng(0x5eed5eed5eed5eedull);  // fixed: the estimate must be deterministic
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) q(i, j) = rng.next_gaussian();
  q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() * Eigen::MatrixXd::Identity(n, p);

  double prev = -1.0;
  int stable = 0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::MatrixXd z = m * q;
    if (z.norm() == 0.0) return 0.0;
    Eigen::MatrixXd b = q.transpose() * z;  // p x p projection
    double estimate = Eigen::EigenSolver<Eigen::MatrixXd>(b, false).eigenvalues().cwiseAbs().maxCoeff();
    if (it >= 20 && prev > 0.0 && std::abs(estimate - prev) <= 1e-12 * std::max(estimate, 1e-30)) {
      if (++stable >= 3) return estimate;
    } else {
      stable = 0;
    }
    prev = estimate;
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() * Eigen::MatrixXd::Identity(n, p);
  }
  throw std::runtime_error("estimate_spectral_radius: power iteration did not converge");
}

Reservoir init_reservoir(std::uint64_t seed, int N, int input_dim, double spectral_radius) {
  if (N < 1) throw std::invalid_argument("init_reservoir: N must be >= 1");
  Rng rng = substream(seed, "reservoir", 0);

  Reservoir res;
  res.seed = seed;
  res.spectral_radius = spectral_radius;
  res.recurrent.resize(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) res.recurrent(i, j) = rng.next_gaussian();

  if (spectral_radius == 0.0) {
    res.recurrent.setZero();
  } else {
    double rho = estimate_spectral_radius(res.recurrent);
    if (rho <= 0.0) throw std::runtime_error("init_reservoir: degenerate recurrent matrix");
    res.recurrent *= spectral_radius / rho;
  }

  res.input.resize(N, input_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < input_dim; ++j) res.input(i, j) = scale * rng.next_gaussian();

  res.initial_state = Eigen::VectorXd::Zero(N);
  return res;
}

int esn_input_dim(int d_o, int C) {
  return C == 1 ? 2 * d_o : d_o + d_o * C * (C - 1);
}

Eigen::VectorXd interaction_input(const InteractionSet& interactions) {
  const int C = interactions.C;
  const int d_o = static_cast<int>(interactions.z.size());
  Eigen::VectorXd z(C == 1 ? d_o : d_o * C * (C - 1));
  Eigen::Index k = 0;
  for (int i = 0; i < d_o; ++i) {
    if (C == 1) {
      z(k++) = interactions.z[i](0, 0);
    } else {
      for (int a = 0; a < C; ++a)
        for (int b = 0; b < C; ++b)
          if (a != b) z(k++) = interactions.z[i](a, b);
    }
  }
  return z;
}

Eigen::MatrixXd drive(const Reservoir& res, const Episode& episode, const Eigen::VectorXd* initial_state) {
  const int T = static_cast<int>(episode.observations.rows());
  const int d_o = static_cast<int>(episode.observations.cols());
  const Eigen::VectorXd z = interaction_input(episode.interactions);
  if (d_o + z.size() != res.input_dim())
    throw std::invalid_argument("drive: episode input dimension does not match reservoir");

  Eigen::VectorXd u(res.input_dim());
  u.tail(z.size()) = z;
  Eigen::VectorXd x = initial_state ? *initial_state : res.initial_state;
  Eigen::MatrixXd states(T, res.size());
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < d_o; ++i) u(i) = static_cast<double>(episode.observations(t, i));
    x = (res.recurrent * x + res.input * u).array().tanh();
    states.row(t) = x;
  }
  return states;
}

Eigen::MatrixXd joint_log_increment_targets(const Episode& episode) {
  const int C = episode.likelihood.C;
  const int R = episode.likelihood.R;
  const int T = static_cast<int>(episode.observations.rows());

  BeliefTrajectory traj = run_trajectory(episode, ObserverKind::Joint);
  Eigen::MatrixXd targets(T, C * R);
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < C; ++c) {
      for (int r = 0; r < R; ++r) {
        double num = std::max(traj.marginals[t + 1](c, r), 1e-300);
        double den = std::max(traj.marginals[t](c, r), 1e-300);
        targets(t, c * R + r) = std::log(num) - std::log(den);
      }
    }
  }
  return targets;
}

ReadoutFitter::ReadoutFitter(int state_dim, int target_dim)
    : gram_(Eigen::MatrixXd::Zero(state_dim, state_dim)),
      cross_(Eigen::MatrixXd::Zero(state_dim, target_dim)),
      sum_states_(Eigen::VectorXd::Zero(state_dim)),
      sum_targets_(Eigen::VectorXd::Zero(target_dim)) {}

void ReadoutFitter::add(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets) {
  gram_.noalias() += states.transpose() * states;
  cross_.noalias() += states.transpose() * targets;
  sum_states_ += states.colwise().sum();
  sum_targets_ += targets.colwise().sum();
  count_ += states.rows();
}

void ReadoutFitter::merge(const ReadoutFitter& other) {
  gram_ += other.gram_;
  cross_ += other.cross_;
  sum_states_ += other.sum_states_;
  sum_targets_ += other.sum_targets_;
  count_ += other.count_;
}

Readout ReadoutFitter::solve(double ridge) const {
  if (count_ < 2) throw std::runtime_error("ReadoutFitter: not enough samples");
  const double n = static_cast<double>(count_);
  const Eigen::VectorXd mean_x = sum_states_ / n;
  const Eigen::VectorXd mean_y = sum_targets_ / n;
  Eigen::MatrixXd cxx = gram_ - n * mean_x * mean_x.transpose();
  Eigen::MatrixXd cxy = cross_ - n * mean_x * mean_y.transpose();
  cxx.diagonal().array() += ridge;

  Eigen::LDLT<Eigen::MatrixXd> solver(cxx);
  if (ridge <= 0.0 && solver.info() != Eigen::Success)
    throw std::runtime_error("ReadoutFitter: singular normal matrix with ridge = 0");

  Readout out;
  out.ridge = ridge;
  out.weights = solver.solve(cxy).transpose();
  out.bias = mean_y - out.weights * mean_x;
  if (!out.weights.allFinite()) throw std::runtime_error("ReadoutFitter: non-finite solution");
  return out;
}

Readout fit_readout(const std::vector<Eigen::MatrixXd>& states_batch,
                    const std::vector<Eigen::MatrixXd>& targets_batch, double ridge) {
  if (states_batch.empty() || states_batch.size() != targets_batch.size())
    throw std::invalid_argument("fit_readout: mismatched batches");
  ReadoutFitter fitter(static_cast<int>(states_batch[0].cols()), static_cast<int>(targets_batch[0].cols()));
  for (std::size_t e = 0; e < states_batch.size(); ++e) fitter.add(states_batch[e], targets_batch[e]);
  return fitter.solve(ridge);
}

EsnEvaluation evaluate_esn(const Reservoir& res, const Readout& readout,
                           const std::vector<Episode>& episodes, bool oracle_targets) {
  if (episodes.empty()) throw std::invalid_argument("evaluate_esn: empty episode batch");
  const int C = episodes[0].likelihood.C;
  const int R = episodes[0].likelihood.R;
  const int T = static_cast<int>(episodes[0].observations.rows());

  EsnEvaluation eval;
  eval.accuracy = Eigen::VectorXd::Zero(T + 1);
  eval.trajectories.reserve(episodes.size());

  for (const Episode& ep : episodes) {
    Eigen::MatrixXd increments;
    if (oracle_targets) {
      increments = joint_log_increment_targets(ep);
    } else {
      Eigen::MatrixXd states = drive(res, ep);
      increments = states * readout.weights.transpose();
      increments.rowwise() += readout.bias.transpose();
    }

    BeliefTrajectory traj;
    traj.kind = ObserverKind::Joint;
    traj.goal.resize(T + 1, R);
    traj.goal.row(0).setConstant(1.0 / R);
    traj.marginals.push_back(Eigen::MatrixXd::Constant(C, R, 1.0 / R));

    Eigen::MatrixXd accum = Eigen::MatrixXd::Zero(C, R);
    const int astar = ep.optimal_action();
    if (map_action(traj.goal.row(0)) == astar) eval.accuracy(0) += 1.0;
    for (int t = 0; t < T; ++t) {
      for (int c = 0; c < C; ++c)
        for (int r = 0; r < R; ++r) accum(c, r) += increments(t, c * R + r);
      Eigen::MatrixXd snap(C, R);
      for (int c = 0; c < C; ++c) {
        Eigen::VectorXd row = accum.row(c);
        snap.row(c) = (row.array() - logsumexp(row)).exp();
      }
      traj.goal.row(t + 1) = snap.row(ep.goal);
      traj.marginals.push_back(std::move(snap));
      if (map_action(traj.goal.row(t + 1)) == astar) eval.accuracy(t + 1) += 1.0;
    }
    eval.trajectories.push_back(std::move(traj));
  }
  eval.accuracy /= static_cast<double>(episodes.size());
  return eval;
}

}  // namespace cogrid
