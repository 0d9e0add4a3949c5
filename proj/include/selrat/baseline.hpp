#pragma once

#include <set>
#include <string>
#include <vector>

#include "selrat/corpus.hpp"
#include "selrat/metrics.hpp"

namespace selrat {

// Shipped fixed English stopword list; punctuation-only tokens are always
// treated as stopwords regardless of the list.
const std::set<std::string>& default_stoplist();

bool is_stopword(const std::string& token,
                 const std::set<std::string>& stoplist);

enum class OverlapMode { kAbsolute, kRelative };

struct OverlapFeatures {
  double q_s = 0;  // question overlap
  double a_s = 0;  // answer overlap
};

// Type-level overlap of a sentence with the question/answer, stopwords
// excluded. Relative mode divides by the number of non-stop types on the
// question/answer side (0 when the denominator is 0).
OverlapFeatures overlap_features(const std::vector<std::string>& sentence,
                                 const std::vector<std::string>& question,
                                 const std::vector<std::string>& answer,
                                 const std::set<std::string>& stoplist,
                                 OverlapMode mode);

// argmax over sentences of r = w_q * q_s + w_a * a_s; ties go to the
// shorter sentence, then to the lower index.
int select_sentence(const Sample& sample, double w_q, double w_a,
                    OverlapMode mode, const std::set<std::string>& stoplist);

struct LRModel {
  double w_q_feat = 0;  // weight on the q_s feature
  double w_a_feat = 0;  // weight on the a_s feature
  double bias = 0;

  double score(const OverlapFeatures& f) const {
    return w_q_feat * f.q_s + w_a_feat * f.a_s + bias;
  }
  int classify(const OverlapFeatures& f) const { return score(f) > 0 ? 1 : 0; }
};

// Binary logistic regression on the two overlap features, full-batch
// gradient descent from zero init until the gradient norm drops below
// 1e-8 or 10k iterations.
LRModel train_lr(const std::vector<OverlapFeatures>& features,
                 const std::vector<int>& labels);

struct BaselineResult {
  double w_q = 0, w_a = 0;
  OverlapMode mode = OverlapMode::kAbsolute;
  LRModel model;
  double val_f1a = 0;
};

struct BaselineGrid {
  std::vector<double> w_q_values;
  std::vector<double> w_a_values;
  std::vector<OverlapMode> modes;

  // w_q, w_a in {0.0, 0.1, ..., 1.0}, both modes.
  static BaselineGrid defaults();
};

// For every (w_q, w_a, mode): select one sentence per training sample, fit
// the LR, score F1a on the validation split with the same selection rule;
// keep the best (first in iteration order on ties).
BaselineResult grid_search(const Dataset& train, const Dataset& val,
                           const BaselineGrid& grid,
                           const std::set<std::string>& stoplist);

// F1a / accuracy of a fitted configuration on a split.
TargetMetrics evaluate_baseline(const Dataset& data,
                                const BaselineResult& config,
                                const std::set<std::string>& stoplist,
                                std::vector<int>* selections = nullptr);

}  // namespace selrat
