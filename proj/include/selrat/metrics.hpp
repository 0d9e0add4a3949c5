#pragma once

#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "selrat/corpus.hpp"

namespace selrat {

struct PredictionRecord {
  std::string sample_id;
  int predicted_label = 0;
  int selected_index = 0;              // row into candidates/logits
  std::vector<int> selected_candidate; // sentence indices, empty = query-only
  CandidateSet candidates;
  Eigen::VectorXd weights;
  Eigen::MatrixXd logits;
};

struct MetricReport {
  double f1a = 0, accuracy = 0;
  double rationale_precision = 0, rationale_recall = 0, rationale_f1 = 0;
  double acc_full = 0, acc_part = 0;
  double iou_f1 = 0, token_f1 = 0;
  std::size_t num_samples = 0;
  std::size_t num_annotated = 0;
};

// Prediction: candidate with the largest weight (lowest index on
// ties), label from that row's argmax (lowest class on ties).
std::pair<int, int> predict(const Eigen::MatrixXd& z,
                            const Eigen::VectorXd& w);

double set_f1(const std::set<int>& selected, const std::set<int>& gold);

// Gold set maximizing sentence-level F1 against the selection; ties broken
// by the lexicographically smallest sorted index sequence.
const std::set<int>& best_gold_match(const std::set<int>& selected,
                                     const std::vector<std::set<int>>& golds);

struct EraserOptions {
  // Token F1 against the best-matching gold set by default; true switches
  // to the union over all gold sets for strict ERASER comparability.
  bool token_f1_all_golds = false;
};

MetricReport evaluate(const std::vector<PredictionRecord>& records,
                      const Dataset& dataset,
                      const EraserOptions& opts = {});

// Per-class F1 (index = class id) plus macro F1 and accuracy.
struct TargetMetrics {
  std::vector<double> per_class_f1;
  double f1a = 0;
  double accuracy = 0;
};

TargetMetrics target_metrics(const std::vector<int>& predicted,
                             const std::vector<int>& gold, int num_labels);

}  // namespace selrat
