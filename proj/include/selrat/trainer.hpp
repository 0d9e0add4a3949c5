#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "selrat/encoder.hpp"
#include "selrat/inference.hpp"
#include "selrat/metrics.hpp"
#include "selrat/objective.hpp"
#include "selrat/rng.hpp"

namespace selrat {

enum class Optimizer { kSgdMomentum, kAdaptiveMoments };

struct TrainConfig {
  int epochs = 10;
  int samples_per_step = 8;  // B
  double learning_rate = 1e-2;
  Optimizer optimizer = Optimizer::kAdaptiveMoments;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 1;
  int h = 1;
  ObjectiveConfig objective;
  int eval_every = 0;        // steps; 0 = once per epoch
  bool keep_best = true;     // return best-validation params, else final
};

struct TrainRecord {
  long step = 0;
  double train_loss = 0;
  MetricReport val;
};

struct TrainHistory {
  std::vector<TrainRecord> records;
};

// One optimizer step over averaged gradients. State matches the parameter
// shapes; lazily initialized on first use.
template <typename Scalar>
class OptimizerState {
 public:
  void apply(Params<Scalar>& params, const Params<Scalar>& grad,
             const TrainConfig& cfg) {
    ++step_;
    if (!initialized_) {
      m_ = Params<Scalar>::zeros(params.config());
      v_ = Params<Scalar>::zeros(params.config());
      initialized_ = true;
    }
    const Scalar lr = static_cast<Scalar>(cfg.learning_rate);
    if (cfg.optimizer == Optimizer::kSgdMomentum) {
      const Scalar mu = static_cast<Scalar>(cfg.momentum);
      auto upd = [&](auto& p, const auto& g, auto& m, auto&) {
        m = mu * m + g;
        p -= lr * m;
      };
      visit(params, grad, upd);
    } else {
      const Scalar b1 = static_cast<Scalar>(cfg.beta1);
      const Scalar b2 = static_cast<Scalar>(cfg.beta2);
      const Scalar eps = static_cast<Scalar>(cfg.eps);
      const Scalar bc1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(step_));
      const Scalar bc2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(step_));
      auto upd = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = b1 * m + (Scalar(1) - b1) * g;
        v = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
        p.array() -= lr * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + eps);
      };
      visit(params, grad, upd);
    }
  }

 private:
  template <typename F>
  void visit(Params<Scalar>& p, const Params<Scalar>& g, F&& f) {
    f(p.embedding, g.embedding, m_.embedding, v_.embedding);
    f(p.null_sentence, g.null_sentence, m_.null_sentence, v_.null_sentence);
    f(p.W1, g.W1, m_.W1, v_.W1);
    f(p.b1, g.b1, m_.b1, v_.b1);
    f(p.W2, g.W2, m_.W2, v_.W2);
    f(p.b2, g.b2, m_.b2, v_.b2);
  }

  bool initialized_ = false;
  long step_ = 0;
  Params<Scalar> m_, v_;
};

// Forward + objective + backward for one sample; returns the total loss and
// accumulates the gradient.
template <typename Scalar>
Scalar sample_loss_and_grad(const Params<Scalar>& params,
                            const Dataset& dataset, const Sample& sample,
                            const TrainConfig& cfg, Params<Scalar>& grad_acc) {
  const auto candidates = enumerate_candidates(sample, cfg.h);
  auto [z, cache] = encode_candidates(params, dataset, sample, candidates);
  const auto gold_mask = gold_candidate_mask(sample, candidates);
  const auto breakdown =
      total_loss_and_grad<Scalar>(z, sample.label, gold_mask, cfg.objective);
  const auto grad = backward(params, cache, breakdown.dL_dz);
  grad_acc.embedding += grad.embedding;
  grad_acc.null_sentence += grad.null_sentence;
  grad_acc.W1 += grad.W1;
  grad_acc.b1 += grad.b1;
  grad_acc.W2 += grad.W2;
  grad_acc.b2 += grad.b2;
  return breakdown.total;
}

// Mini-batch training: every candidate of a sample shares the sample's
// forward pass, gradients are averaged over the B samples of a step.
template <typename Scalar>
std::pair<Params<Scalar>, TrainHistory> train(const Dataset& train_set,
                                              const Dataset& val_set,
                                              Params<Scalar> params,
                                              const TrainConfig& cfg) {
  if (train_set.samples.empty()) {
    throw std::invalid_argument("empty training set");
  }
  params.check_shapes();

  // Validation shares the training vocabulary.
  Dataset val = val_set;
  val.vocabulary = train_set.vocabulary;

  TrainHistory history;
  OptimizerState<Scalar> opt;
  Rng shuffle_rng(cfg.seed);

  Params<Scalar> best = params;
  double best_f1a = -1, best_rat_f1 = -1;

  auto run_validation = [&](long step, double loss) {
    const auto records =
        predict_dataset(params, val, cfg.h, cfg.objective.tau);
    TrainRecord rec;
    rec.step = step;
    rec.train_loss = loss;
    rec.val = evaluate(records, val);
    history.records.push_back(rec);
    if (cfg.keep_best &&
        (rec.val.f1a > best_f1a ||
         (rec.val.f1a == best_f1a && rec.val.rationale_f1 > best_rat_f1))) {
      best_f1a = rec.val.f1a;
      best_rat_f1 = rec.val.rationale_f1;
      best = params;
    }
  };

  std::vector<std::size_t> order(train_set.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0;
    long epoch_steps = 0;
    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(cfg.samples_per_step)) {
      const std::size_t batch_end = std::min(
          pos + static_cast<std::size_t>(cfg.samples_per_step), order.size());
      Params<Scalar> grad = Params<Scalar>::zeros(params.config());
      double loss_sum = 0;
      for (std::size_t b = pos; b < batch_end; ++b) {
        loss_sum += static_cast<double>(sample_loss_and_grad(
            params, train_set, train_set.samples[order[b]], cfg, grad));
      }
      const Scalar inv_b = Scalar(1) / static_cast<Scalar>(batch_end - pos);
      grad.for_each([&](auto& g) { g *= inv_b; });
      const double batch_loss = loss_sum / (batch_end - pos);
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("non-finite loss at step " +
                                 std::to_string(step));
      }
      opt.apply(params, grad, cfg);
      ++step;
      epoch_loss += batch_loss;
      ++epoch_steps;
      if (cfg.eval_every > 0 && step % cfg.eval_every == 0) {
        run_validation(step, batch_loss);
      }
    }
    if (cfg.eval_every == 0 && !val.samples.empty()) {
      run_validation(step, epoch_steps == 0 ? 0.0 : epoch_loss / epoch_steps);
    }
  }
  return {cfg.keep_best && best_f1a >= 0 ? best : params, history};
}

// Seeded stratified subsample without replacement; size = round(f * N).
Dataset subsample(const Dataset& dataset, double fraction, std::uint64_t seed);

class RunConfig;

// The run-file keys understood by train_config_from/encoder_config_from.
const std::set<std::string>& train_config_keys();

// Map a flat run config onto training/encoder settings, rejecting unknown
// keys. Shared by the CLI and the experiment harnesses so a config file is
// interpreted exactly one way.
TrainConfig train_config_from(const RunConfig& cfg);
EncoderConfig encoder_config_from(const RunConfig& cfg, const Dataset& train);

}  // namespace selrat
