#include "core/controller.hpp"

#include <cmath>
#include <stdexcept>

#include "core/observers.hpp"

namespace cogrid {

namespace {
constexpr double kClip = 1e-3;

double clip_prob(double p) { return std::min(std::max(p, kClip), 1.0 - kClip); }

double reward_from_probs(const Eigen::VectorXd& probs, const Eigen::VectorXd& omega) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    double p = clip_prob(probs(i));
    acc += std::log(p) * omega(i) + std::log(1.0 - p) * (1.0 - omega(i));
  }
  return std::exp(acc / static_cast<double>(probs.size()));
}
}  // namespace

PreferenceSpec sample_preferences(std::uint64_t seed, int d_o, bool binary) {
  Rng rng = substream(seed, "omega", 0);
  PreferenceSpec spec;
  spec.seed = seed;
  spec.omega.resize(d_o);
  for (int i = 0; i < d_o; ++i)
    spec.omega(i) = binary ? static_cast<double>(rng.next_below(2)) : rng.next_double();
  return spec;
}

int PreferenceLandscape::argmax() const {
  int best = 0;
  for (int i = 1; i < reward.size(); ++i)
    if (reward(i) > reward(best)) best = i;
  return best;
}

double intrinsic_reward(const std::vector<int>& r, const PreferenceSpec& omega, const LikelihoodTensor& ell) {
  const std::size_t idx = ell.flat_index(r);
  Eigen::VectorXd probs(ell.d_o);
  for (int i = 0; i < ell.d_o; ++i) probs(i) = ell.ell[i](static_cast<Eigen::Index>(idx));
  return reward_from_probs(probs, omega.omega);
}

PreferenceLandscape build_landscape(const PreferenceSpec& omega, const LikelihoodTensor& ell,
                                    LandscapeSource kind, int draws, std::uint64_t seed) {
  PreferenceLandscape out;
  out.source = kind;
  out.R = ell.R;
  out.C = ell.C;
  const std::size_t cells = ell.cells();
  out.reward.resize(static_cast<Eigen::Index>(cells));

  std::vector<int> r(ell.C, 0);
  for (std::size_t idx = 0; idx < cells; ++idx) {
    if (kind == LandscapeSource::Oracle) {
      out.reward(static_cast<Eigen::Index>(idx)) = intrinsic_reward(r, omega, ell);
    } else {
      Rng rng = substream(seed, "empirical-cell", idx);
      Eigen::MatrixXi obs = set_state_and_observe(ell, r, draws, rng);
      Eigen::VectorXd mean = obs.cast<double>().colwise().mean();
      out.reward(static_cast<Eigen::Index>(idx)) = reward_from_probs(mean, omega.omega);
    }
    for (int c = ell.C - 1; c >= 0; --c) {  // advance row-major multi-index
      if (++r[c] < ell.R) break;
      r[c] = 0;
    }
  }
  return out;
}

Eigen::VectorXd PolicyParams::probabilities() const {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

double PolicyParams::entropy() const {
  Eigen::VectorXd p = probabilities();
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  return h;
}

int PolicyParams::greedy_action() const { return map_action(probabilities()); }

double a2c_loss(const Eigen::VectorXd& logits, double value, const std::vector<int>& actions,
                const Eigen::VectorXd& rewards, const Eigen::VectorXd& detached_advantages, double beta) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  p /= p.sum();
  Eigen::VectorXd logp = p.array().max(1e-300).log();
  double entropy = -(p.array() * logp.array()).sum();

  double loss = 0.0;
  for (std::size_t j = 0; j < actions.size(); ++j) {
    double adv = rewards(static_cast<Eigen::Index>(j)) - value;
    loss += adv * adv - logp(actions[j]) * detached_advantages(static_cast<Eigen::Index>(j));
  }
  loss /= static_cast<double>(actions.size());
  return loss - beta * entropy;
}

A2cDiagnostics a2c_step(PolicyParams& policy, const PreferenceLandscape& landscape, Rng& rng, int batch,
                        double beta_decay, bool adam, Eigen::VectorXd* adam_m, Eigen::VectorXd* adam_v,
                        int* adam_t) {
  if (batch < 1) throw std::invalid_argument("a2c_step: batch must be >= 1");
  const Eigen::Index n_actions = policy.logits.size();
  Eigen::VectorXd p = policy.probabilities();
  Eigen::VectorXd logp = p.array().max(1e-300).log();
  double entropy = -(p.array() * logp.array()).sum();

  Eigen::VectorXd cdf(n_actions);
  double run = 0.0;
  for (Eigen::Index i = 0; i < n_actions; ++i) {
    run += p(i);
    cdf(i) = run;
  }

  Eigen::VectorXd action_adv = Eigen::VectorXd::Zero(n_actions);  // summed advantage per action
  double sum_adv = 0.0;
  double sum_reward = 0.0;
  for (int j = 0; j < batch; ++j) {
    double u = rng.next_double() * run;
    Eigen::Index lo = 0, hi = n_actions - 1;
    while (lo < hi) {
      Eigen::Index mid = (lo + hi) / 2;
      if (cdf(mid) < u) lo = mid + 1; else hi = mid;
    }
    double reward = landscape.reward(lo);
    double adv = reward - policy.value;
    action_adv(lo) += adv;
    sum_adv += adv;
    sum_reward += reward;
  }
  const double bn = static_cast<double>(batch);

  // d/dtheta of mean[-ln pi(r_j) * detach(A_j)] + beta * d/dtheta of (-H).
  Eigen::VectorXd grad_logits = -(action_adv / bn - (sum_adv / bn) * p);
  grad_logits += policy.beta * (p.array() * (logp.array() + entropy)).matrix();
  double grad_value = -2.0 * sum_adv / bn;

  if (adam) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++*adam_t;
    *adam_m = b1 * *adam_m + (1.0 - b1) * grad_logits;
    *adam_v = b2 * adam_v->array().matrix() + (1.0 - b2) * grad_logits.cwiseProduct(grad_logits);
    double corr1 = 1.0 - std::pow(b1, *adam_t);
    double corr2 = 1.0 - std::pow(b2, *adam_t);
    policy.logits -= (policy.lr * (adam_m->array() / corr1) /
                      ((adam_v->array() / corr2).sqrt() + eps))
                         .matrix();
  } else {
    policy.logits -= policy.lr * grad_logits;
  }
  policy.value -= policy.lr * grad_value;
  policy.beta *= beta_decay;

  if (!policy.logits.allFinite()) throw std::runtime_error("a2c_step: non-finite logits");

  A2cDiagnostics diag;
  diag.mean_advantage = sum_adv / bn;
  diag.mean_reward = sum_reward / bn;
  diag.entropy = policy.entropy();
  return diag;
}

double normalized_performance(const PolicyParams& policy, const PreferenceLandscape& true_landscape) {
  return true_landscape.reward(policy.greedy_action()) / true_landscape.reward.maxCoeff();
}

TrainingResult train_controller(const A2cConfig& cfg, const PreferenceLandscape& landscape,
                                const PreferenceLandscape& true_landscape) {
  TrainingResult result;
  result.policy.logits = Eigen::VectorXd::Zero(landscape.reward.size());
  result.policy.value = 0.0;
  result.policy.beta = cfg.beta;
  result.policy.lr = cfg.lr;
  result.performance.resize(cfg.episodes);
  result.entropy.resize(cfg.episodes);

  Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(landscape.reward.size());
  Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(landscape.reward.size());
  int adam_t = 0;

  for (int e = 0; e < cfg.episodes; ++e) {
    Rng rng = substream(cfg.seed, "a2c", static_cast<std::uint64_t>(e));
    A2cDiagnostics diag =
        a2c_step(result.policy, landscape, rng, cfg.batch, cfg.beta_decay, cfg.adam, &adam_m, &adam_v, &adam_t);
    result.performance(e) = normalized_performance(result.policy, true_landscape);
    result.entropy(e) = diag.entropy;
    if (e % 50 == 0) result.greedy_log.push_back(result.policy.greedy_action());
  }
  result.greedy_log.push_back(result.policy.greedy_action());
  return result;
}

}  // namespace cogrid
