#include "core/latent.hpp"

#include <cmath>
#include <unordered_set>

#include "core/rng.hpp"

namespace cogrid {

namespace {

// Gram-Schmidt over the rows of block (d_o x d_E), then unit normalization.
// Returns false if a residual norm underflows.
bool orthonormalize_rows(Eigen::MatrixXd& block) {
  for (int i = 0; i < block.rows(); ++i) {
    for (int j = 0; j < i; ++j) {
      block.row(i) -= block.row(j).dot(block.row(i)) * block.row(j);
    }
    double norm = block.row(i).norm();
    if (norm < 1e-12) return false;
    block.row(i) /= norm;
  }
  return true;
}

Eigen::MatrixXd draw_block(Rng& rng, int d_o, int d_E) {
  Eigen::MatrixXd block(d_o, d_E);
  for (int i = 0; i < d_o; ++i)
    for (int j = 0; j < d_E; ++j) block(i, j) = rng.next_gaussian();
  return block;
}

}  // namespace

EmbeddingSpace create_embeddings(std::uint64_t seed, int S, int d_o, int d_E) {
  if (S < 1 || d_o < 1) throw std::invalid_argument("create_embeddings: S and d_o must be >= 1");
  if (d_E < d_o) throw std::invalid_argument("create_embeddings: requires d_E >= d_o");

  EmbeddingSpace space;
  space.S = S;
  space.d_o = d_o;
  space.d_E = d_E;
  space.seed = seed;
  space.keys.resize(S * d_o, d_E);
  space.queries.resize(S * d_o, d_E);

  for (int s = 0; s < S; ++s) {
    // Degenerate residuals are re-drawn from a derived sub-seed so the
    // result stays a pure function of (seed, s).
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng = substream(hash_combine(seed, attempt), "embeddings", static_cast<std::uint64_t>(s));
      Eigen::MatrixXd k = draw_block(rng, d_o, d_E);
      Eigen::MatrixXd q = draw_block(rng, d_o, d_E);
      if (orthonormalize_rows(k) && orthonormalize_rows(q)) {
        space.keys.block(s * d_o, 0, d_o, d_E) = k;
        space.queries.block(s * d_o, 0, d_o, d_E) = q;
        break;
      }
      if (attempt > 64) throw std::runtime_error("create_embeddings: persistent degenerate draw");
    }
  }
  return space;
}

InteractionSet compute_interactions(const EmbeddingSpace& space, const std::vector<int>& context) {
  const int C = static_cast<int>(context.size());
  if (C < 1) throw std::invalid_argument("compute_interactions: empty context");
  std::unordered_set<int> seen;
  for (int s : context) {
    if (s < 0 || s >= space.S) throw std::invalid_argument("compute_interactions: context index out of range");
    if (!seen.insert(s).second) throw std::invalid_argument("compute_interactions: duplicate context index");
  }
  InteractionSet out;
  out.context = context;
  out.C = C;
  out.z.reserve(space.d_o);
  for (int i = 0; i < space.d_o; ++i) {
    Eigen::MatrixXd zi(C, C);
    for (int a = 0; a < C; ++a)
      for (int b = 0; b < C; ++b) zi(a, b) = space.query(context[a], i).dot(space.key(context[b], i));
    out.z.push_back(std::move(zi));
  }
  return out;
}

Eigen::VectorXd phase_weights(double z, int R) {
  const int N = 1 + 2 * R;
  Eigen::VectorXd score(N);
  for (int n = 0; n < N; ++n) {
    double theta = 2.0 * M_PI * (static_cast<double>(n) / N - z);
    double dist = std::min(std::abs(theta), 2.0 * M_PI - std::abs(theta));
    double scaled = (N / (2.0 * M_PI)) * dist;
    score(n) = -scaled * scaled;
  }
  Eigen::VectorXd w = (score.array() - score.maxCoeff()).exp();
  return w / w.sum();
}

Eigen::VectorXd expand_phase_vector(double z, int R, double lambda) {
  if (R < 2) throw std::invalid_argument("expand_phase_vector: requires R >= 2");
  if (lambda < 0.0) throw std::invalid_argument("expand_phase_vector: requires lambda >= 0");
  const int N = 1 + 2 * R;
  const Eigen::VectorXd w = phase_weights(z, R);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(R);
  for (int r = 0; r < R; ++r) {
    double acc = 0.0;
    for (int n = 0; n < N; ++n) {
      int m = ((n - r) % N + N) % N;  // mod in [0, N)
      acc += lambda * std::sin((2.0 * M_PI / N) * (m - N)) * w(n);
    }
    v(r) = acc;
  }
  return v;
}

LikelihoodTensor build_likelihood(const InteractionSet& interactions, int R, double lambda) {
  const int C = interactions.C;
  const int d_o = static_cast<int>(interactions.z.size());
  LikelihoodTensor out;
  out.R = R;
  out.C = C;
  out.d_o = d_o;

  std::size_t cells = 1;
  for (int c = 0; c < C; ++c) cells *= static_cast<std::size_t>(R);

  // Row-major strides over axis order (r_1, ..., r_C).
  std::vector<std::size_t> stride(C);
  std::size_t acc = 1;
  for (int c = C - 1; c >= 0; --c) {
    stride[c] = acc;
    acc *= static_cast<std::size_t>(R);
  }

  out.ell.reserve(d_o);
  for (int i = 0; i < d_o; ++i) {
    Eigen::VectorXd pre = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells));
    if (C == 1) {
      pre = expand_phase_vector(interactions.z[i](0, 0), R, lambda);
    } else {
      for (int c = 0; c < C; ++c) {
        for (int cp = c + 1; cp < C; ++cp) {
          Eigen::VectorXd va = expand_phase_vector(interactions.z[i](c, cp), R, lambda);
          Eigen::VectorXd vb = expand_phase_vector(interactions.z[i](cp, c), R, lambda);
          for (std::size_t idx = 0; idx < cells; ++idx) {
            int rc = static_cast<int>(idx / stride[c] % static_cast<std::size_t>(R));
            int rcp = static_cast<int>(idx / stride[cp] % static_cast<std::size_t>(R));
            pre(static_cast<Eigen::Index>(idx)) += va(rc) * vb(rcp);
          }
        }
      }
    }
    out.ell.push_back(pre.unaryExpr([](double x) { return sigmoid(x); }));
  }
  return out;
}

Eigen::MatrixXd marginal_likelihood(const LikelihoodTensor& ell, int c) {
  if (c < 0 || c >= ell.C) throw std::invalid_argument("marginal_likelihood: variable index out of range");
  const int R = ell.R;
  const std::size_t cells = ell.cells();
  std::size_t stride = 1;
  for (int k = ell.C - 1; k > c; --k) stride *= static_cast<std::size_t>(R);
  const double other = static_cast<double>(cells) / R;

  Eigen::MatrixXd marg = Eigen::MatrixXd::Zero(ell.d_o, R);
  for (int i = 0; i < ell.d_o; ++i) {
    for (std::size_t idx = 0; idx < cells; ++idx) {
      int rc = static_cast<int>(idx / stride % static_cast<std::size_t>(R));
      marg(i, rc) += ell.ell[i](static_cast<Eigen::Index>(idx));
    }
  }
  return marg / other;
}

}  // namespace cogrid
