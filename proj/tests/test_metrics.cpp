#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "selrat/metrics.hpp"
#include "selrat/rng.hpp"

#include "metric_oracle.hpp"

using namespace selrat;

using namespace selrat::oracle;

TEST_CASE("predict picks the heaviest candidate, then its argmax class") {
  Eigen::MatrixXd z(3, 2);
  z << 0, 1, 5, -5, 2, 3;
  Eigen::VectorXd w(3);
  w << 0.2, 0.5, 0.3;
  const auto [label, cand] = predict(z, w);
  CHECK(cand == 1);
  CHECK(label == 0);

  SUBCASE("weight ties break toward the lowest index") {
    Eigen::VectorXd tie(3);
    tie << 0.4, 0.4, 0.2;
    CHECK(predict(z, tie).second == 0);
  }

  SUBCASE("class ties break toward the lowest class") {
    Eigen::MatrixXd ztie(1, 3);
    ztie << 2, 2, 2;
    Eigen::VectorXd one(1);
    one << 1.0;
    CHECK(predict(ztie, one).first == 0);
  }

  SUBCASE("shape mismatch rejected") {
    Eigen::VectorXd bad(2);
    CHECK_THROWS(predict(z, bad));
  }
}

TEST_CASE("set_f1 closed forms") {
  CHECK(set_f1({1, 2}, {1, 2}) == 1.0);
  CHECK(set_f1({1}, {2}) == 0.0);
  CHECK(set_f1({}, {1}) == 0.0);
  CHECK(set_f1({1}, {}) == 0.0);
  // |sel|=2, |gold|=3, inter=1: p=1/2, r=1/3, f1=2/5.
  CHECK(set_f1({1, 9}, {1, 2, 3}) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("best_gold_match maximizes F1, ties to the smallest set") {
  const std::vector<std::set<int>> golds = {{3, 4}, {1}, {2}};
  CHECK(best_gold_match({1}, golds) == std::set<int>{1});
  CHECK(best_gold_match({3, 4}, golds) == std::set<int>{3, 4});
  // No overlap anywhere: all F1 0, lexicographically smallest wins.
  CHECK(best_gold_match({7}, golds) == std::set<int>{1});
  CHECK_THROWS(best_gold_match({1}, {}));
}

TEST_CASE("target_metrics hand example") {
  // gold:    0 0 1 1
  // pred:    0 1 1 1
  // class 0: tp=1 fp=0 fn=1 -> f1 = 2/3; class 1: tp=2 fp=1 fn=0 -> f1 = 4/5.
  const auto m = target_metrics({0, 1, 1, 1}, {0, 0, 1, 1}, 2);
  CHECK(m.accuracy == doctest::Approx(0.75));
  CHECK(m.per_class_f1[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(m.per_class_f1[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.f1a == doctest::Approx((2.0 / 3 + 0.8) / 2).epsilon(1e-12));

  // A class absent from both gold and predictions contributes F1 0.
  const auto m3 = target_metrics({0, 1}, {0, 1}, 3);
  CHECK(m3.per_class_f1[2] == 0.0);
  CHECK(m3.f1a == doctest::Approx(2.0 / 3).epsilon(1e-12));

  CHECK_THROWS(target_metrics({0}, {0, 1}, 2));
}

TEST_CASE("evaluate hand-built cases") {
  Dataset ds;
  ds.num_labels = 2;
  ds.label_names = {"a", "b"};
  auto make = [](int label, int n, std::vector<std::set<int>> golds) {
    Sample s;
    s.label = label;
    for (int i = 0; i < n; ++i) {
      Sentence sent;
      sent.index = i;
      sent.tokens = {"x", "y"};
      s.document.push_back(std::move(sent));
    }
    s.gold_rationales = std::move(golds);
    return s;
  };
  ds.samples.push_back(make(1, 4, {{1, 2}}));
  ds.samples.push_back(make(0, 4, {{0}}));
  ds.samples.push_back(make(1, 4, {}));  // unannotated

  std::vector<PredictionRecord> recs(3);
  recs[0].predicted_label = 1;
  recs[0].selected_candidate = {1, 2};  // exact match
  recs[1].predicted_label = 0;
  recs[1].selected_candidate = {0, 3};  // superset of the gold
  recs[2].predicted_label = 0;          // wrong label, no annotation

  const auto rep = evaluate(recs, ds);
  CHECK(rep.num_samples == 3);
  CHECK(rep.num_annotated == 2);
  CHECK(rep.accuracy == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(rep.rationale_precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rep.rationale_recall == doctest::Approx(1.0).epsilon(1e-12));
  // Sample 1 F1 = 1, sample 2 F1 = 2*(1/2)*1/(3/2) = 2/3.
  CHECK(rep.rationale_f1 == doctest::Approx((1.0 + 2.0 / 3) / 2).epsilon(1e-12));
  CHECK(rep.acc_full == 1.0);  // both annotated predictions cover a gold set
  CHECK(rep.acc_part == 1.0);

  SUBCASE("wrong label zeroes the accuracy-style rationale metrics") {
    recs[0].predicted_label = 0;
    const auto r2 = evaluate(recs, ds);
    CHECK(r2.acc_full == 0.5);
    CHECK(r2.acc_part == 0.5);
  }

  SUBCASE("record/dataset misalignment rejected") {
    recs.pop_back();
    CHECK_THROWS(evaluate(recs, ds));
  }
}

TEST_CASE("span IOU example: partial overlap below and above threshold") {
  // One document, sentences of 4 tokens each. Selection {0,1} = tokens
  // [0,8), gold {1,2} = tokens [4,12): intersection 4, union 12, IOU = 1/3,
  // so no span matches and IOU F1 = 0. Token F1 is 4/8 vs 4/8 = 0.5.
  Dataset ds;
  ds.num_labels = 2;
  ds.label_names = {"a", "b"};
  Sample s;
  s.label = 0;
  for (int i = 0; i < 4; ++i) {
    Sentence sent;
    sent.index = i;
    sent.tokens = {"t", "t", "t", "t"};
    s.document.push_back(std::move(sent));
  }
  s.gold_rationales = {{1, 2}};
  ds.samples.push_back(s);

  std::vector<PredictionRecord> recs(1);
  recs[0].predicted_label = 0;
  recs[0].selected_candidate = {0, 1};
  const auto rep = evaluate(recs, ds);
  CHECK(rep.iou_f1 == 0.0);
  CHECK(rep.token_f1 == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("IOU >= 0.5 counts as a span match") {
    // Selection {1,2,3} vs gold {1,2}: tokens [4,16) vs [4,12), IOU = 8/12.
    recs[0].selected_candidate = {1, 2, 3};
    const auto r2 = evaluate(recs, ds);
    CHECK(r2.iou_f1 == 1.0);
  }
}

TEST_CASE("evaluate matches the naive oracle on randomized instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = random_instance(rng);
    for (bool all_golds : {false, true}) {
      EraserOptions opts;
      opts.token_f1_all_golds = all_golds;
      const auto got = evaluate(inst.records, inst.dataset, opts);
      const auto want = naive_evaluate(inst.records, inst.dataset, all_golds);
      CHECK(got.num_samples == want.num_samples);
      CHECK(got.num_annotated == want.num_annotated);
      CHECK(got.accuracy == want.accuracy);
      CHECK(got.f1a == want.f1a);
      CHECK(got.rationale_precision == want.rationale_precision);
      CHECK(got.rationale_recall == want.rationale_recall);
      CHECK(got.rationale_f1 == want.rationale_f1);
      CHECK(got.acc_full == want.acc_full);
      CHECK(got.acc_part == want.acc_part);
      CHECK(got.iou_f1 == want.iou_f1);
      CHECK(got.token_f1 == want.token_f1);
    }
  }
}

TEST_CASE("ordering invariant on fully annotated data") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    // Force every sample to carry at least one gold set.
    for (auto& s : inst.dataset.samples) {
      if (s.gold_rationales.empty()) s.gold_rationales.push_back({0});
    }
    const auto rep = evaluate(inst.records, inst.dataset);
    CHECK(rep.acc_full <= rep.acc_part + 1e-12);
    CHECK(rep.acc_part <= rep.accuracy + 1e-12);
  }
}
