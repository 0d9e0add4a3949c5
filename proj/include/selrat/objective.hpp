#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "selrat/corpus.hpp"

namespace selrat {

struct ObjectiveConfig {
  double tau = 1.0;               // softmax temperature over confidences
  double lambda_rationale = 1.0;  // weight of the rationale BCE term
  bool supervised = false;
  bool stop_grad_weights = false; // ablation: block gradient through w
};

template <typename Scalar>
struct LossBreakdown {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector losses;        // per-candidate cross-entropy l
  Vector confidences;   // c, row-wise max of z
  Vector weights;       // w, temperature softmax of c
  Scalar weighted_loss = 0;
  Scalar rationale_bce = 0;  // 0 when unsupervised
  Scalar total = 0;
  Matrix dL_dz;
};

// Per-candidate cross-entropy: l_i = -log softmax(z_i)[y], max-stabilized.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> candidate_losses(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z, int y) {
  if (y < 0 || y >= z.cols()) {
    throw std::invalid_argument("label out of range");
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> l(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const Scalar m = z.row(i).maxCoeff();
    const Scalar logsum =
        m + std::log((z.row(i).array() - m).exp().sum());
    l(i) = logsum - z(i, y);
  }
  return l;
}

// Row-wise max of the logits, the per-candidate confidence. argmax class per
// row, lowest index on ties, is what the gradient routes through.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> confidences(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z,
    std::vector<int>* argmax_class = nullptr) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(z.rows());
  if (argmax_class) argmax_class->assign(z.rows(), 0);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index j;
    c(i) = z.row(i).maxCoeff(&j);
    if (argmax_class) (*argmax_class)[i] = static_cast<int>(j);
  }
  return c;
}

// Temperature softmax over confidences, max-stabilized.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c, double tau) {
  if (tau <= 0) throw std::invalid_argument("tau must be positive");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scaled =
      c / static_cast<Scalar>(tau);
  const Scalar m = scaled.maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w =
      (scaled.array() - m).exp().matrix();
  return w / w.sum();
}

template <typename Scalar>
Scalar weighted_loss(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& l) {
  if (w.size() != l.size()) {
    throw std::invalid_argument("weighted_loss: length mismatch");
  }
  return w.dot(l);
}

// Adapted confidences for rationale supervision: gold rows take the gold
// class's logit, others keep the row max.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> supervised_confidences(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z, int y,
    const std::vector<bool>& gold_mask) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c_star(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    c_star(i) = gold_mask[i] ? z(i, y) : z.row(i).maxCoeff();
  }
  return c_star;
}

// Mean binary cross-entropy of sigmoid(c*) against the gold mask, in the
// stable logits formulation: bce(x, t) = max(x,0) - t*x + log(1+e^{-|x|}).
template <typename Scalar>
Scalar rationale_bce(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c_star,
                     const std::vector<bool>& gold_mask) {
  if (static_cast<std::size_t>(c_star.size()) != gold_mask.size()) {
    throw std::invalid_argument("rationale_bce: length mismatch");
  }
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < c_star.size(); ++i) {
    const Scalar x = c_star(i);
    const Scalar t = gold_mask[i] ? Scalar(1) : Scalar(0);
    sum += std::max(x, Scalar(0)) - t * x + std::log1p(std::exp(-std::abs(x)));
  }
  return sum / static_cast<Scalar>(c_star.size());
}

// Full objective and its gradient w.r.t. the logits. Three paths feed
// dL/dz: the per-row cross-entropy scaled by w, the candidate softmax
// through the row-max subgradient (unless stop_grad_weights), and, when
// supervised, the BCE through c*.
template <typename Scalar>
LossBreakdown<Scalar> total_loss_and_grad(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z, int y,
    const std::vector<bool>& gold_mask, const ObjectiveConfig& config) {
  LossBreakdown<Scalar> out;
  const Eigen::Index m = z.rows();
  const Eigen::Index t = z.cols();

  out.losses = candidate_losses(z, y);
  std::vector<int> argmax_class;
  out.confidences = confidences(z, &argmax_class);
  out.weights = weights(out.confidences, config.tau);
  out.weighted_loss = weighted_loss(out.weights, out.losses);

  out.dL_dz.setZero(m, t);

  // (a) d(sum_i w_i l_i)/dz through l: w_i * (softmax(z_i) - onehot(y)).
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar mx = z.row(i).maxCoeff();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p =
        (z.row(i).array() - mx).exp().matrix().transpose();
    p /= p.sum();
    p(y) -= Scalar(1);
    out.dL_dz.row(i) += out.weights(i) * p.transpose();
  }

  // (b) through w: dL/dc_i = w_i (l_i - sum_j w_j l_j) / tau, routed to the
  // row-argmax logit.
  if (!config.stop_grad_weights) {
    const Scalar inv_tau = Scalar(1) / static_cast<Scalar>(config.tau);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar dc =
          out.weights(i) * (out.losses(i) - out.weighted_loss) * inv_tau;
      out.dL_dz(i, argmax_class[i]) += dc;
    }
  }

  // (c) rationale BCE through c*.
  if (config.supervised) {
    if (gold_mask.size() != static_cast<std::size_t>(m)) {
      throw std::invalid_argument("gold_mask length mismatch");
    }
    auto c_star = supervised_confidences(z, y, gold_mask);
    out.rationale_bce = rationale_bce(c_star, gold_mask);
    const Scalar lam = static_cast<Scalar>(config.lambda_rationale);
    const Scalar inv_m = Scalar(1) / static_cast<Scalar>(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar sig = Scalar(1) / (Scalar(1) + std::exp(-c_star(i)));
      const Scalar target = gold_mask[i] ? Scalar(1) : Scalar(0);
      const Scalar dcs = lam * inv_m * (sig - target);
      out.dL_dz(i, gold_mask[i] ? y : argmax_class[i]) += dcs;
    }
  }

  out.total = out.weighted_loss +
              static_cast<Scalar>(config.lambda_rationale) * out.rationale_bce;
  return out;
}

// Gold labeling of candidates under supervision: positive iff the candidate
// is non-empty and its sentence set is a subset of some gold rationale set.
inline std::vector<bool> gold_candidate_mask(const Sample& sample,
                                             const CandidateSet& candidates) {
  std::vector<bool> mask(candidates.size(), false);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& idx = candidates[c].indices;
    if (idx.empty()) continue;
    for (const auto& gold : sample.gold_rationales) {
      bool subset = true;
      for (int i : idx) {
        if (!gold.count(i)) { subset = false; break; }
      }
      if (subset) { mask[c] = true; break; }
    }
  }
  return mask;
}

}  // namespace selrat
