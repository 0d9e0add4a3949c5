#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "selrat/corpus.hpp"
#include "selrat/rng.hpp"

namespace selrat {

struct EncoderConfig {
  int vocab_size = 0;
  int embed_dim = 16;   // d
  int hidden_dim = 16;  // d_h
  int num_labels = 2;   // t

  bool operator==(const EncoderConfig&) const = default;
};

// Reference encoder parameters. One logit row per candidate:
//   qbar = mean embedding of the query tokens
//   v_s  = mean embedding of sentence s (null_sentence for the query-only
//          candidate)
//   h_s  = tanh([qbar, v_s] W1 + b1)
//   pair {a,b}: h = elementwise max(h_a, h_b)
//   z    = h W2 + b2
template <typename Scalar>
struct Params {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix embedding;      // vocab_size x d
  Vector null_sentence;  // d
  Matrix W1;             // 2d x d_h
  Vector b1;             // d_h
  Matrix W2;             // d_h x t
  Vector b2;             // t

  static Params zeros(const EncoderConfig& cfg) {
    Params p;
    p.embedding = Matrix::Zero(cfg.vocab_size, cfg.embed_dim);
    p.null_sentence = Vector::Zero(cfg.embed_dim);
    p.W1 = Matrix::Zero(2 * cfg.embed_dim, cfg.hidden_dim);
    p.b1 = Vector::Zero(cfg.hidden_dim);
    p.W2 = Matrix::Zero(cfg.hidden_dim, cfg.num_labels);
    p.b2 = Vector::Zero(cfg.num_labels);
    return p;
  }

  // Embeddings and weights uniform in [-0.1, 0.1] from the seeded
  // generator, biases zero.
  static Params init(const EncoderConfig& cfg, std::uint64_t seed) {
    Params p = zeros(cfg);
    Rng rng(seed);
    auto fill = [&](Matrix& m) {
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
          m(i, j) = static_cast<Scalar>(rng.next_range(-0.1, 0.1));
    };
    fill(p.embedding);
    for (Eigen::Index i = 0; i < p.null_sentence.size(); ++i)
      p.null_sentence(i) = static_cast<Scalar>(rng.next_range(-0.1, 0.1));
    fill(p.W1);
    fill(p.W2);
    return p;
  }

  EncoderConfig config() const {
    EncoderConfig cfg;
    cfg.vocab_size = static_cast<int>(embedding.rows());
    cfg.embed_dim = static_cast<int>(embedding.cols());
    cfg.hidden_dim = static_cast<int>(W1.cols());
    cfg.num_labels = static_cast<int>(W2.cols());
    return cfg;
  }

  void check_shapes() const {
    const auto cfg = config();
    if (null_sentence.size() != cfg.embed_dim ||
        W1.rows() != 2 * cfg.embed_dim || b1.size() != cfg.hidden_dim ||
        W2.rows() != cfg.hidden_dim || b2.size() != cfg.num_labels) {
      throw std::runtime_error("inconsistent parameter shapes");
    }
  }

  template <typename F>
  void for_each(F&& f) {
    f(embedding); f(null_sentence); f(W1); f(b1); f(W2); f(b2);
  }
  template <typename F>
  void for_each(F&& f) const {
    f(embedding); f(null_sentence); f(W1); f(b1); f(W2); f(b2);
  }
};

// Activations kept from the forward pass. Per-sentence representations are
// shared between the singleton and pair candidates that use them; gradients
// are accumulated per sentence and pushed through the shared path once.
template <typename Scalar>
struct ForwardCache {
  using Matrix = typename Params<Scalar>::Matrix;
  using Vector = typename Params<Scalar>::Vector;

  std::vector<std::vector<int>> query_ids;  // singleton: token ids per position
  Vector qbar;
  // Row r: representation of sentence r (0..n-1), row n: the null sentence.
  std::vector<std::vector<int>> sentence_ids;
  Matrix values;   // (n+1) x d, mean embeddings / null_sentence
  Matrix hidden;   // (n+1) x d_h, tanh activations
  CandidateSet candidates;
};

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean_embedding(
    const Params<Scalar>& params, const std::vector<int>& ids) {
  typename Params<Scalar>::Vector v =
      Params<Scalar>::Vector::Zero(params.embedding.cols());
  for (int id : ids) v += params.embedding.row(id).transpose();
  return v / static_cast<Scalar>(ids.size());
}

// Elementwise max; the backward pass routes gradient to the argmax element,
// first argument on ties.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> aggregate_pair(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& h_a,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& h_b) {
  if (h_a.size() != h_b.size()) {
    throw std::invalid_argument("aggregate_pair: length mismatch");
  }
  return h_a.cwiseMax(h_b);
}

template <typename Scalar>
std::vector<int> lookup_ids(const Dataset& dataset,
                            const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(token_id(dataset, t));
  return ids;
}

// Forward pass for every candidate of one sample. Returns the logits matrix
// (|candidates| x t) and the cache the backward pass needs.
template <typename Scalar>
std::pair<typename Params<Scalar>::Matrix, ForwardCache<Scalar>>
encode_candidates(const Params<Scalar>& params, const Dataset& dataset,
                  const Sample& sample, const CandidateSet& candidates) {
  params.check_shapes();
  const auto cfg = params.config();
  const int n = sample.num_sentences();

  ForwardCache<Scalar> cache;
  cache.candidates = candidates;
  cache.query_ids.push_back(lookup_ids<Scalar>(dataset, sample.query));
  cache.qbar = mean_embedding(params, cache.query_ids.front());

  cache.sentence_ids.resize(n);
  cache.values.resize(n + 1, cfg.embed_dim);
  cache.hidden.resize(n + 1, cfg.hidden_dim);
  typename Params<Scalar>::Vector u(2 * cfg.embed_dim);
  for (int s = 0; s <= n; ++s) {
    if (s < n) {
      cache.sentence_ids[s] =
          lookup_ids<Scalar>(dataset, sample.document[s].tokens);
      cache.values.row(s) =
          mean_embedding(params, cache.sentence_ids[s]).transpose();
    } else {
      cache.values.row(s) = params.null_sentence.transpose();
    }
    u << cache.qbar, cache.values.row(s).transpose();
    cache.hidden.row(s) =
        (params.W1.transpose() * u + params.b1).array().tanh().transpose();
  }

  typename Params<Scalar>::Matrix z(candidates.size(), cfg.num_labels);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& idx = candidates[c].indices;
    typename Params<Scalar>::Vector h;
    if (idx.empty()) {
      h = cache.hidden.row(n).transpose();
    } else if (idx.size() == 1) {
      h = cache.hidden.row(idx[0]).transpose();
    } else {
      h = aggregate_pair<Scalar>(cache.hidden.row(idx[0]).transpose(),
                                 cache.hidden.row(idx[1]).transpose());
    }
    z.row(c) = (params.W2.transpose() * h + params.b2).transpose();
  }
  return {std::move(z), std::move(cache)};
}

// Gradient of an arbitrary scalar loss w.r.t. all parameters, given dL/dz.
template <typename Scalar>
Params<Scalar> backward(const Params<Scalar>& params,
                        const ForwardCache<Scalar>& cache,
                        const typename Params<Scalar>::Matrix& dL_dz) {
  const auto cfg = params.config();
  const int n = static_cast<int>(cache.sentence_ids.size());
  if (dL_dz.rows() != static_cast<Eigen::Index>(cache.candidates.size()) ||
      dL_dz.cols() != cfg.num_labels) {
    throw std::runtime_error("backward: dL_dz shape does not match cache");
  }

  Params<Scalar> grad = Params<Scalar>::zeros(cfg);
  using Matrix = typename Params<Scalar>::Matrix;
  using Vector = typename Params<Scalar>::Vector;

  // Accumulate dL/dh per shared sentence representation (row n = null).
  Matrix dhidden = Matrix::Zero(n + 1, cfg.hidden_dim);
  for (std::size_t c = 0; c < cache.candidates.size(); ++c) {
    const Vector dz = dL_dz.row(c).transpose();
    const auto& idx = cache.candidates[c].indices;
    Vector h;
    if (idx.empty()) {
      h = cache.hidden.row(n).transpose();
    } else if (idx.size() == 1) {
      h = cache.hidden.row(idx[0]).transpose();
    } else {
      h = cache.hidden.row(idx[0]).transpose().cwiseMax(
          cache.hidden.row(idx[1]).transpose());
    }
    grad.W2 += h * dz.transpose();
    grad.b2 += dz;
    const Vector dh = params.W2 * dz;
    if (idx.empty()) {
      dhidden.row(n) += dh.transpose();
    } else if (idx.size() == 1) {
      dhidden.row(idx[0]) += dh.transpose();
    } else {
      // Subgradient of the max: argmax coordinate, first sentence on ties.
      for (int j = 0; j < cfg.hidden_dim; ++j) {
        if (cache.hidden(idx[0], j) >= cache.hidden(idx[1], j)) {
          dhidden(idx[0], j) += dh(j);
        } else {
          dhidden(idx[1], j) += dh(j);
        }
      }
    }
  }

  Vector dqbar = Vector::Zero(cfg.embed_dim);
  Vector u(2 * cfg.embed_dim);
  for (int s = 0; s <= n; ++s) {
    const Vector h = cache.hidden.row(s).transpose();
    const Vector dpre = dhidden.row(s).transpose().cwiseProduct(
        (Vector::Ones(cfg.hidden_dim) - h.cwiseProduct(h)));
    u << cache.qbar, cache.values.row(s).transpose();
    grad.W1 += u * dpre.transpose();
    grad.b1 += dpre;
    const Vector du = params.W1 * dpre;
    dqbar += du.head(cfg.embed_dim);
    const Vector dv = du.tail(cfg.embed_dim);
    if (s < n) {
      const auto& ids = cache.sentence_ids[s];
      const Scalar inv = Scalar(1) / static_cast<Scalar>(ids.size());
      for (int id : ids) grad.embedding.row(id) += inv * dv.transpose();
    } else {
      grad.null_sentence += dv;
    }
  }
  {
    const auto& ids = cache.query_ids.front();
    const Scalar inv = Scalar(1) / static_cast<Scalar>(ids.size());
    for (int id : ids) grad.embedding.row(id) += inv * dqbar.transpose();
  }
  return grad;
}

}  // namespace selrat
