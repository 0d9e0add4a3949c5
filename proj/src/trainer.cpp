#include "selrat/trainer.hpp"

#include <cmath>

#include "selrat/runconfig.hpp"

namespace selrat {

const std::set<std::string>& train_config_keys() {
  static const std::set<std::string> keys = {
      "epochs",      "batch_size", "learning_rate", "optimizer",
      "momentum",    "beta1",      "beta2",         "eps",
      "seed",        "h",          "tau",           "lambda_rationale",
      "supervised",  "stop_grad_weights",           "eval_every",
      "keep_best",   "embed_dim",  "hidden_dim"};
  return keys;
}

TrainConfig train_config_from(const RunConfig& cfg) {
  cfg.validate_keys(train_config_keys());
  TrainConfig tc;
  tc.epochs = static_cast<int>(cfg.get_int("epochs", 10));
  tc.samples_per_step = static_cast<int>(cfg.get_int("batch_size", 8));
  tc.learning_rate = cfg.get_double("learning_rate", 1e-2);
  const std::string opt = cfg.get_string("optimizer", "adaptive_moments");
  if (opt == "adaptive_moments") {
    tc.optimizer = Optimizer::kAdaptiveMoments;
  } else if (opt == "sgd_momentum") {
    tc.optimizer = Optimizer::kSgdMomentum;
  } else {
    throw std::runtime_error("unknown optimizer: " + opt);
  }
  tc.momentum = cfg.get_double("momentum", 0.9);
  tc.beta1 = cfg.get_double("beta1", 0.9);
  tc.beta2 = cfg.get_double("beta2", 0.999);
  tc.eps = cfg.get_double("eps", 1e-8);
  tc.seed = cfg.get_u64("seed", 1);
  tc.h = static_cast<int>(cfg.get_int("h", 1));
  tc.objective.tau = cfg.get_double("tau", 1.0);
  tc.objective.lambda_rationale = cfg.get_double("lambda_rationale", 1.0);
  tc.objective.supervised = cfg.get_bool("supervised", false);
  tc.objective.stop_grad_weights = cfg.get_bool("stop_grad_weights", false);
  tc.eval_every = static_cast<int>(cfg.get_int("eval_every", 0));
  tc.keep_best = cfg.get_bool("keep_best", true);
  return tc;
}

EncoderConfig encoder_config_from(const RunConfig& cfg, const Dataset& train) {
  EncoderConfig ec;
  ec.vocab_size = static_cast<int>(train.vocabulary.size());
  ec.embed_dim = static_cast<int>(cfg.get_int("embed_dim", 16));
  ec.hidden_dim = static_cast<int>(cfg.get_int("hidden_dim", 16));
  ec.num_labels = train.num_labels;
  return ec;
}

Dataset subsample(const Dataset& dataset, double fraction,
                  std::uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw std::invalid_argument("fraction must be in (0, 1]");
  }
  const std::size_t target = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(dataset.samples.size())));
  if (target == 0) {
    throw std::invalid_argument("fraction yields an empty subsample");
  }

  // Stratified by label: shuffle within each class, take round(f * n_c)
  // per class, then fix up rounding against the overall target.
  std::vector<std::vector<std::size_t>> by_label(dataset.num_labels);
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    by_label[dataset.samples[i].label].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> taken(by_label.size(), 0);
  for (std::size_t c = 0; c < by_label.size(); ++c) {
    rng.shuffle(by_label[c]);
    taken[c] = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(by_label[c].size())));
    taken[c] = std::min(taken[c], by_label[c].size());
  }
  auto total = [&] {
    std::size_t t = 0;
    for (auto v : taken) t += v;
    return t;
  };
  // Adjust one sample at a time, rotating over classes with slack.
  std::size_t c = 0;
  while (total() < target) {
    if (taken[c] < by_label[c].size()) ++taken[c];
    c = (c + 1) % taken.size();
  }
  c = 0;
  while (total() > target) {
    if (taken[c] > 0) --taken[c];
    c = (c + 1) % taken.size();
  }
  for (std::size_t l = 0; l < by_label.size(); ++l) {
    chosen.insert(chosen.end(), by_label[l].begin(),
                  by_label[l].begin() + taken[l]);
  }
  rng.shuffle(chosen);

  Dataset out;
  out.num_labels = dataset.num_labels;
  out.label_names = dataset.label_names;
  out.vocabulary = dataset.vocabulary;
  out.samples.reserve(chosen.size());
  for (std::size_t i : chosen) out.samples.push_back(dataset.samples[i]);
  return out;
}

}  // namespace selrat
