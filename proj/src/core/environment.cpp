#include "core/environment.hpp"

#include <stdexcept>

namespace cogrid {

Episode sample_episode(const EmbeddingSpace& space, const EnvConfig& cfg, std::uint64_t episode_index,
                       const std::vector<int>* variable_pool) {
  if (cfg.S != space.S || cfg.d_o != space.d_o || cfg.d_E != space.d_E)
    throw std::invalid_argument("sample_episode: cfg inconsistent with embedding space");
  const int pool_size = variable_pool ? static_cast<int>(variable_pool->size()) : cfg.S;
  if (cfg.C > pool_size) throw std::invalid_argument("sample_episode: C exceeds available variables");

  Rng rng = substream(cfg.seed, "episode", episode_index);

  Episode ep;
  ep.seed = cfg.seed;
  ep.lambda = cfg.lambda;

  // Partial Fisher-Yates over the variable pool.
  std::vector<int> pool(static_cast<std::size_t>(pool_size));
  for (int i = 0; i < pool_size; ++i) pool[i] = variable_pool ? (*variable_pool)[i] : i;
  for (int i = 0; i < cfg.C; ++i) {
    int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pool_size - i)));
    std::swap(pool[i], pool[j]);
  }
  ep.context.assign(pool.begin(), pool.begin() + cfg.C);

  ep.realizations.resize(cfg.C);
  for (int c = 0; c < cfg.C; ++c) ep.realizations[c] = static_cast<int>(rng.next_below(cfg.R));
  ep.goal = static_cast<int>(rng.next_below(cfg.C));

  ep.interactions = compute_interactions(space, ep.context);
  ep.likelihood = build_likelihood(ep.interactions, cfg.R, cfg.lambda);
  ep.observations = set_state_and_observe(ep.likelihood, ep.realizations, cfg.T, rng);
  return ep;
}

Eigen::VectorXi sample_observation(const LikelihoodTensor& ell, const std::vector<int>& r, Rng& rng) {
  const std::size_t idx = ell.flat_index(r);
  Eigen::VectorXi o(ell.d_o);
  for (int i = 0; i < ell.d_o; ++i) o(i) = rng.next_bernoulli(ell.ell[i](static_cast<Eigen::Index>(idx))) ? 1 : 0;
  return o;
}

Eigen::MatrixXi set_state_and_observe(const LikelihoodTensor& ell, const std::vector<int>& r, int T, Rng& rng) {
  Eigen::MatrixXi obs(T, ell.d_o);
  for (int t = 0; t < T; ++t) obs.row(t) = sample_observation(ell, r, rng);
  return obs;
}

}  // namespace cogrid
