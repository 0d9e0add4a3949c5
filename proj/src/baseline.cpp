#include "selrat/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selrat {

namespace {

std::set<std::string> content_types(const std::vector<std::string>& tokens,
                                    const std::set<std::string>& stoplist) {
  std::set<std::string> types;
  for (const auto& t : tokens) {
    if (!is_stopword(t, stoplist)) types.insert(t);
  }
  return types;
}

double overlap(const std::set<std::string>& side,
               const std::set<std::string>& sentence, OverlapMode mode) {
  std::size_t inter = 0;
  for (const auto& t : side) inter += sentence.count(t);
  if (mode == OverlapMode::kAbsolute) return static_cast<double>(inter);
  return side.empty() ? 0.0
                      : static_cast<double>(inter) /
                            static_cast<double>(side.size());
}

}  // namespace

OverlapFeatures overlap_features(const std::vector<std::string>& sentence,
                                 const std::vector<std::string>& question,
                                 const std::vector<std::string>& answer,
                                 const std::set<std::string>& stoplist,
                                 OverlapMode mode) {
  const auto sent_types = content_types(sentence, stoplist);
  OverlapFeatures f;
  f.q_s = overlap(content_types(question, stoplist), sent_types, mode);
  f.a_s = overlap(content_types(answer, stoplist), sent_types, mode);
  return f;
}

int select_sentence(const Sample& sample, double w_q, double w_a,
                    OverlapMode mode, const std::set<std::string>& stoplist) {
  if (sample.document.empty()) {
    throw std::invalid_argument("select_sentence: empty document");
  }
  int best = 0;
  double best_r = -1;
  for (int s = 0; s < sample.num_sentences(); ++s) {
    const auto f = overlap_features(sample.document[s].tokens, sample.query,
                                    sample.answer, stoplist, mode);
    const double r = w_q * f.q_s + w_a * f.a_s;
    if (s == 0 || r > best_r ||
        (r == best_r && sample.document[s].tokens.size() <
                            sample.document[best].tokens.size())) {
      best = s;
      best_r = r;
    }
  }
  return best;
}

LRModel train_lr(const std::vector<OverlapFeatures>& features,
                 const std::vector<int>& labels) {
  if (features.size() != labels.size() || features.size() < 2) {
    throw std::invalid_argument("train_lr: need >= 2 labeled samples");
  }
  const bool has0 = std::any_of(labels.begin(), labels.end(),
                                [](int y) { return y == 0; });
  const bool has1 = std::any_of(labels.begin(), labels.end(),
                                [](int y) { return y == 1; });
  if (!has0 || !has1) {
    throw std::invalid_argument("train_lr: both classes must be present");
  }

  LRModel model;
  const double n = static_cast<double>(features.size());
  const double lr = 0.5;
  for (int iter = 0; iter < 10000; ++iter) {
    double gq = 0, ga = 0, gb = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-model.score(features[i])));
      const double err = p - labels[i];
      gq += err * features[i].q_s;
      ga += err * features[i].a_s;
      gb += err;
    }
    gq /= n; ga /= n; gb /= n;
    if (std::sqrt(gq * gq + ga * ga + gb * gb) < 1e-8) break;
    model.w_q_feat -= lr * gq;
    model.w_a_feat -= lr * ga;
    model.bias -= lr * gb;
  }
  return model;
}

BaselineGrid BaselineGrid::defaults() {
  BaselineGrid grid;
  for (int i = 0; i <= 10; ++i) {
    grid.w_q_values.push_back(i / 10.0);
    grid.w_a_values.push_back(i / 10.0);
  }
  grid.modes = {OverlapMode::kAbsolute, OverlapMode::kRelative};
  return grid;
}

TargetMetrics evaluate_baseline(const Dataset& data,
                                const BaselineResult& config,
                                const std::set<std::string>& stoplist,
                                std::vector<int>* selections) {
  std::vector<int> predicted, gold;
  for (const auto& sample : data.samples) {
    const int s = select_sentence(sample, config.w_q, config.w_a, config.mode,
                                  stoplist);
    if (selections) selections->push_back(s);
    const auto f = overlap_features(sample.document[s].tokens, sample.query,
                                    sample.answer, stoplist, config.mode);
    predicted.push_back(config.model.classify(f));
    gold.push_back(sample.label);
  }
  return target_metrics(predicted, gold, 2);
}

BaselineResult grid_search(const Dataset& train, const Dataset& val,
                           const BaselineGrid& grid,
                           const std::set<std::string>& stoplist) {
  if (grid.w_q_values.empty() || grid.w_a_values.empty() ||
      grid.modes.empty()) {
    throw std::invalid_argument("grid_search: empty grid");
  }
  if (train.num_labels != 2) {
    throw std::invalid_argument("the overlap baseline is binary only");
  }

  BaselineResult best;
  bool first = true;
  for (OverlapMode mode : grid.modes) {
    for (double w_q : grid.w_q_values) {
      for (double w_a : grid.w_a_values) {
        std::vector<OverlapFeatures> features;
        std::vector<int> labels;
        for (const auto& sample : train.samples) {
          const int s = select_sentence(sample, w_q, w_a, mode, stoplist);
          features.push_back(overlap_features(sample.document[s].tokens,
                                              sample.query, sample.answer,
                                              stoplist, mode));
          labels.push_back(sample.label);
        }
        BaselineResult cand;
        cand.w_q = w_q;
        cand.w_a = w_a;
        cand.mode = mode;
        cand.model = train_lr(features, labels);
        cand.val_f1a = evaluate_baseline(val, cand, stoplist).f1a;
        if (first || cand.val_f1a > best.val_f1a) {
          best = cand;
          first = false;
        }
      }
    }
  }
  return best;
}

}  // namespace selrat
