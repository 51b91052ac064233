#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cogrid {

// Ground-truth key/query vectors for all latent variables. For each variable
// the d_o key (and query) vectors are orthonormal after construction.
struct EmbeddingSpace {
  Eigen::MatrixXd keys;     // (S * d_o) x d_E, row (s * d_o + i)
  Eigen::MatrixXd queries;  // same layout
  int S = 0;
  int d_o = 0;
  int d_E = 0;
  std::uint64_t seed = 0;

  Eigen::VectorXd key(int s, int i) const { return keys.row(s * d_o + i); }
  Eigen::VectorXd query(int s, int i) const { return queries.row(s * d_o + i); }
};

// Query-key couplings for one context: d_o matrices of shape C x C. The
// diagonal carries the self term used only when C = 1.
struct InteractionSet {
  std::vector<Eigen::MatrixXd> z;  // d_o entries, each C x C
  std::vector<int> context;
  int C = 0;
};

// Bernoulli parameter tensor over all R^C joint realizations, one flat
// row-major array per observation dimension. Axis order is (r_1, ..., r_C):
// index = r_1 * R^(C-1) + ... + r_C.
struct LikelihoodTensor {
  std::vector<Eigen::VectorXd> ell;  // d_o arrays of length R^C
  int R = 0;
  int C = 0;
  int d_o = 0;

  std::size_t cells() const { return ell.empty() ? 0 : static_cast<std::size_t>(ell[0].size()); }
  std::size_t flat_index(const std::vector<int>& r) const {
    std::size_t idx = 0;
    for (int c = 0; c < C; ++c) idx = idx * static_cast<std::size_t>(R) + static_cast<std::size_t>(r[c]);
    return idx;
  }
};

EmbeddingSpace create_embeddings(std::uint64_t seed, int S, int d_o, int d_E);

// z^i_{cc'} = q^i_c . k^i_{c'} for all ordered pairs, plus the diagonal self
// terms. Rejects duplicate or out-of-range context indices.
InteractionSet compute_interactions(const EmbeddingSpace& space, const std::vector<int>& context);

// Smooth roll of a sinusoidal base: v(r) = sum_n Theta(n, r) * omega_z(n).
Eigen::VectorXd expand_phase_vector(double z, int R, double lambda);

// Softmax weights over circular distances from z; exposed for property tests.
Eigen::VectorXd phase_weights(double z, int R);

LikelihoodTensor build_likelihood(const InteractionSet& interactions, int R, double lambda);

// Uniform average of ell over all realizations of the other C-1 variables;
// returns a d_o x R matrix of P(o = 1 | r_c).
Eigen::MatrixXd marginal_likelihood(const LikelihoodTensor& ell, int c);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace cogrid
