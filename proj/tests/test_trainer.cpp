#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "selrat/synthgen.hpp"
#include "selrat/trainer.hpp"

using namespace selrat;

namespace {

template <typename Scalar>
double param_diff(const Params<Scalar>& a, const Params<Scalar>& b) {
  auto d = [](const auto& x, const auto& y) {
    return static_cast<double>((x - y).cwiseAbs().maxCoeff());
  };
  double m = d(a.embedding, b.embedding);
  m = std::max(m, d(a.null_sentence, b.null_sentence));
  m = std::max(m, d(a.W1, b.W1));
  m = std::max(m, d(a.b1, b.b1));
  m = std::max(m, d(a.W2, b.W2));
  m = std::max(m, d(a.b2, b.b2));
  return m;
}

Dataset tiny_corpus(int num_samples, std::uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.num_samples = num_samples;
  cfg.vocab_size = 60;
  cfg.sentences_per_doc = 4;
  cfg.seed = seed;
  Dataset ds = gen_single_evidence(cfg);
  build_vocabulary(ds);
  return ds;
}

EncoderConfig encoder_config(const Dataset& ds) {
  EncoderConfig cfg;
  cfg.vocab_size = static_cast<int>(ds.vocabulary.size());
  cfg.embed_dim = 6;
  cfg.hidden_dim = 5;
  cfg.num_labels = ds.num_labels;
  return cfg;
}

}  // namespace

TEST_CASE("zero learning rate leaves the parameters untouched") {
  const Dataset ds = tiny_corpus(8);
  const auto init = Params<double>::init(encoder_config(ds), 7);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 0.0;
  cfg.keep_best = false;
  for (auto opt : {Optimizer::kSgdMomentum, Optimizer::kAdaptiveMoments}) {
    cfg.optimizer = opt;
    const auto [out, hist] = train(ds, ds, init, cfg);
    CHECK(param_diff(out, init) == 0.0);
    CHECK(hist.records.size() == 2);
  }
}

TEST_CASE("one plain SGD step matches the hand-computed update") {
  Dataset ds = tiny_corpus(1);
  const auto init = Params<double>::init(encoder_config(ds), 3);

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.samples_per_step = 1;
  cfg.learning_rate = 0.05;
  cfg.optimizer = Optimizer::kSgdMomentum;
  cfg.momentum = 0.0;
  cfg.keep_best = false;

  Params<double> grad = Params<double>::zeros(init.config());
  sample_loss_and_grad(init, ds, ds.samples[0], cfg, grad);

  const auto [out, hist] = train(ds, ds, init, cfg);
  Params<double> expect = init;
  expect.embedding -= cfg.learning_rate * grad.embedding;
  expect.null_sentence -= cfg.learning_rate * grad.null_sentence;
  expect.W1 -= cfg.learning_rate * grad.W1;
  expect.b1 -= cfg.learning_rate * grad.b1;
  expect.W2 -= cfg.learning_rate * grad.W2;
  expect.b2 -= cfg.learning_rate * grad.b2;
  CHECK(param_diff(out, expect) == 0.0);
  REQUIRE(hist.records.size() == 1);
  // The recorded loss is the pre-step loss of the only batch.
  Params<double> scratch = Params<double>::zeros(init.config());
  const double loss = sample_loss_and_grad(init, ds, ds.samples[0], cfg, scratch);
  CHECK(hist.records[0].train_loss == doctest::Approx(loss).epsilon(1e-12));
}

TEST_CASE("a full batch averages the per-sample gradients") {
  Dataset ds = tiny_corpus(2);
  const auto init = Params<double>::init(encoder_config(ds), 11);

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.samples_per_step = 2;
  cfg.learning_rate = 0.1;
  cfg.optimizer = Optimizer::kSgdMomentum;
  cfg.momentum = 0.0;
  cfg.keep_best = false;

  Params<double> g = Params<double>::zeros(init.config());
  sample_loss_and_grad(init, ds, ds.samples[0], cfg, g);
  sample_loss_and_grad(init, ds, ds.samples[1], cfg, g);
  g.for_each([](auto& x) { x *= 0.5; });

  const auto [out, hist] = train(ds, ds, init, cfg);
  Params<double> expect = init;
  expect.embedding -= cfg.learning_rate * g.embedding;
  expect.null_sentence -= cfg.learning_rate * g.null_sentence;
  expect.W1 -= cfg.learning_rate * g.W1;
  expect.b1 -= cfg.learning_rate * g.b1;
  expect.W2 -= cfg.learning_rate * g.W2;
  expect.b2 -= cfg.learning_rate * g.b2;
  CHECK(param_diff(out, expect) < 1e-15);
}

TEST_CASE("first adaptive-moments step matches the closed form") {
  Dataset ds = tiny_corpus(1);
  const auto init = Params<double>::init(encoder_config(ds), 5);

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.samples_per_step = 1;
  cfg.learning_rate = 0.01;
  cfg.optimizer = Optimizer::kAdaptiveMoments;
  cfg.keep_best = false;

  Params<double> g = Params<double>::zeros(init.config());
  sample_loss_and_grad(init, ds, ds.samples[0], cfg, g);

  // After bias correction the first step is lr * g / (|g| + eps).
  const auto [out, hist] = train(ds, ds, init, cfg);
  auto check = [&](const auto& p0, const auto& g0, const auto& p1) {
    for (Eigen::Index i = 0; i < p0.size(); ++i) {
      const double upd = cfg.learning_rate * g0(i) /
                         (std::abs(g0(i)) + cfg.eps);
      CHECK(p1(i) == doctest::Approx(p0(i) - upd).epsilon(1e-10));
    }
  };
  check(init.b2, g.b2, out.b2);
  check(init.b1, g.b1, out.b1);
  check(init.W2.reshaped(), g.W2.reshaped(), out.W2.reshaped());
}

TEST_CASE("training is deterministic") {
  const Dataset ds = tiny_corpus(20);
  const Dataset val = tiny_corpus(10, 2);
  const auto init = Params<float>::init(encoder_config(ds), 1);

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.samples_per_step = 4;
  const auto [p1, h1] = train(ds, val, init, cfg);
  const auto [p2, h2] = train(ds, val, init, cfg);
  CHECK(param_diff(p1, p2) == 0.0);
  REQUIRE(h1.records.size() == h2.records.size());
  for (std::size_t i = 0; i < h1.records.size(); ++i) {
    CHECK(h1.records[i].train_loss == h2.records[i].train_loss);
    CHECK(h1.records[i].val.f1a == h2.records[i].val.f1a);
  }

  TrainConfig other = cfg;
  other.seed = 99;
  const auto [p3, h3] = train(ds, val, init, other);
  CHECK(param_diff(p1, p3) > 0.0);  // different shuffle, different trajectory
}

TEST_CASE("training reduces the loss on a learnable corpus") {
  const Dataset ds = tiny_corpus(60);
  const auto init = Params<float>::init(encoder_config(ds), 1);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.learning_rate = 0.02;
  const auto [out, hist] = train(ds, ds, init, cfg);
  REQUIRE(hist.records.size() == 8);
  CHECK(hist.records.back().train_loss < 0.5 * hist.records[0].train_loss);
  CHECK(hist.records.back().val.accuracy > hist.records[0].val.accuracy);
}

TEST_CASE("keep_best returns the best validation snapshot") {
  const Dataset ds = tiny_corpus(30);
  const Dataset val = tiny_corpus(20, 4);
  const auto init = Params<float>::init(encoder_config(ds), 2);
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.learning_rate = 0.3;  // deliberately unstable so quality fluctuates
  const auto [out, hist] = train(ds, val, init, cfg);

  double best = -1;
  for (const auto& r : hist.records) best = std::max(best, r.val.f1a);
  Dataset bound = val;
  bound.vocabulary = ds.vocabulary;
  const auto records = predict_dataset(out, bound, cfg.h, cfg.objective.tau);
  CHECK(evaluate(records, bound).f1a == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("eval_every produces step-indexed validation records") {
  const Dataset ds = tiny_corpus(16);
  const auto init = Params<float>::init(encoder_config(ds), 1);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.samples_per_step = 4;  // 4 steps per epoch
  cfg.eval_every = 2;
  cfg.keep_best = false;
  const auto [out, hist] = train(ds, ds, init, cfg);
  REQUIRE(hist.records.size() == 4);
  CHECK(hist.records[0].step == 2);
  CHECK(hist.records[1].step == 4);
  CHECK(hist.records[3].step == 8);
}

TEST_CASE("empty training set rejected") {
  Dataset empty;
  empty.num_labels = 2;
  const Dataset val = tiny_corpus(2);
  const auto init = Params<float>::init(encoder_config(val), 1);
  CHECK_THROWS(train(empty, val, init, TrainConfig{}));
}

TEST_CASE("subsample is stratified, sized by rounding and deterministic") {
  const Dataset ds = tiny_corpus(100);
  const Dataset half = subsample(ds, 0.5, 9);
  CHECK(half.samples.size() == 50);
  std::map<int, int> counts;
  for (const auto& s : half.samples) ++counts[s.label];
  CHECK(counts[0] == 25);
  CHECK(counts[1] == 25);

  const Dataset again = subsample(ds, 0.5, 9);
  REQUIRE(again.samples.size() == half.samples.size());
  for (std::size_t i = 0; i < half.samples.size(); ++i) {
    CHECK(half.samples[i].id == again.samples[i].id);
  }

  const Dataset other = subsample(ds, 0.5, 10);
  bool identical = true;
  for (std::size_t i = 0; i < half.samples.size(); ++i) {
    identical = identical && half.samples[i].id == other.samples[i].id;
  }
  CHECK_FALSE(identical);

  // Members come from the source and are unique.
  std::set<std::string> ids;
  for (const auto& s : half.samples) ids.insert(s.id);
  CHECK(ids.size() == half.samples.size());

  CHECK(subsample(ds, 1.0, 1).samples.size() == 100);
  CHECK_THROWS(subsample(ds, -0.1, 1));
  CHECK_THROWS(subsample(ds, 1.5, 1));
}
