#include "selrat/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace selrat {

std::pair<int, int> predict(const Eigen::MatrixXd& z,
                            const Eigen::VectorXd& w) {
  if (z.rows() != w.size()) {
    throw std::invalid_argument("predict: shape mismatch");
  }
  int cand = 0;
  for (Eigen::Index i = 1; i < w.size(); ++i) {
    if (w(i) > w(cand)) cand = static_cast<int>(i);
  }
  int label = 0;
  for (Eigen::Index j = 1; j < z.cols(); ++j) {
    if (z(cand, j) > z(cand, label)) label = static_cast<int>(j);
  }
  return {label, cand};
}

double set_f1(const std::set<int>& selected, const std::set<int>& gold) {
  if (selected.empty() || gold.empty()) return 0.0;
  std::size_t inter = 0;
  for (int i : selected) inter += gold.count(i);
  if (inter == 0) return 0.0;
  const double p = static_cast<double>(inter) / selected.size();
  const double r = static_cast<double>(inter) / gold.size();
  return 2 * p * r / (p + r);
}

const std::set<int>& best_gold_match(const std::set<int>& selected,
                                     const std::vector<std::set<int>>& golds) {
  if (golds.empty()) {
    throw std::invalid_argument("best_gold_match: no gold rationales");
  }
  const std::set<int>* best = &golds.front();
  double best_f1 = set_f1(selected, *best);
  for (std::size_t g = 1; g < golds.size(); ++g) {
    const double f1 = set_f1(selected, golds[g]);
    if (f1 > best_f1 ||
        (f1 == best_f1 &&
         std::lexicographical_compare(golds[g].begin(), golds[g].end(),
                                      best->begin(), best->end()))) {
      best = &golds[g];
      best_f1 = f1;
    }
  }
  return *best;
}

TargetMetrics target_metrics(const std::vector<int>& predicted,
                             const std::vector<int>& gold, int num_labels) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("target_metrics: length mismatch");
  }
  TargetMetrics out;
  out.per_class_f1.assign(num_labels, 0.0);
  std::vector<std::size_t> tp(num_labels, 0), fp(num_labels, 0),
      fn(num_labels, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == gold[i]) {
      ++correct;
      ++tp[gold[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[gold[i]];
    }
  }
  double f1_sum = 0;
  for (int c = 0; c < num_labels; ++c) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    out.per_class_f1[c] = denom == 0 ? 0.0 : 2.0 * tp[c] / denom;
    f1_sum += out.per_class_f1[c];
  }
  out.f1a = num_labels == 0 ? 0.0 : f1_sum / num_labels;
  out.accuracy =
      predicted.empty() ? 0.0
                        : static_cast<double>(correct) / predicted.size();
  return out;
}

namespace {

struct Span {
  int begin = 0;  // token offsets, half-open
  int end = 0;
};

// Sentence-index set -> token spans, merging contiguous sentences.
std::vector<Span> sentence_spans(const std::set<int>& sentences,
                                 const std::vector<int>& sent_begin,
                                 const std::vector<int>& sent_end) {
  std::vector<Span> spans;
  int prev = -2;
  for (int s : sentences) {
    if (s == prev + 1 && !spans.empty()) {
      spans.back().end = sent_end[s];
    } else {
      spans.push_back({sent_begin[s], sent_end[s]});
    }
    prev = s;
  }
  return spans;
}

double span_iou(const Span& a, const Span& b) {
  const int inter = std::max(0, std::min(a.end, b.end) -
                                    std::max(a.begin, b.begin));
  const int uni = std::max(a.end, b.end) - std::min(a.begin, b.begin);
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

double safe_div(double num, double den) { return den == 0 ? 0.0 : num / den; }

double f1_from(double p, double r) {
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

}  // namespace

MetricReport evaluate(const std::vector<PredictionRecord>& records,
                      const Dataset& dataset, const EraserOptions& opts) {
  if (records.size() != dataset.samples.size()) {
    throw std::invalid_argument("evaluate: records do not match dataset");
  }

  MetricReport report;
  report.num_samples = records.size();

  std::vector<int> predicted, gold_labels;
  predicted.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    predicted.push_back(records[i].predicted_label);
    gold_labels.push_back(dataset.samples[i].label);
  }
  const auto target = target_metrics(predicted, gold_labels,
                                     dataset.num_labels);
  report.f1a = target.f1a;
  report.accuracy = target.accuracy;

  double p_sum = 0, r_sum = 0, f1_sum = 0;
  std::size_t full = 0, part = 0;
  // Micro accumulators for the ERASER metrics.
  std::size_t iou_pred_total = 0, iou_gold_total = 0;
  std::size_t iou_pred_matched = 0, iou_gold_matched = 0;
  std::size_t tok_inter = 0, tok_pred = 0, tok_gold = 0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const Sample& sample = dataset.samples[i];
    if (sample.gold_rationales.empty()) continue;
    ++report.num_annotated;

    const std::set<int> selected(records[i].selected_candidate.begin(),
                                 records[i].selected_candidate.end());
    const std::set<int>& match =
        best_gold_match(selected, sample.gold_rationales);

    std::size_t inter = 0;
    for (int s : selected) inter += match.count(s);
    const double p = selected.empty()
                         ? 0.0
                         : static_cast<double>(inter) / selected.size();
    const double r = static_cast<double>(inter) / match.size();
    p_sum += p;
    r_sum += r;
    f1_sum += f1_from(p, r);

    const bool correct = records[i].predicted_label == sample.label;
    bool contains_full = false, intersects = false;
    for (const auto& g : sample.gold_rationales) {
      bool subset = true;
      bool any = false;
      for (int s : g) {
        if (selected.count(s)) any = true; else subset = false;
      }
      contains_full = contains_full || subset;
      intersects = intersects || any;
    }
    if (correct && contains_full) ++full;
    if (correct && intersects) ++part;

    // Token offsets of each sentence.
    std::vector<int> sent_begin(sample.document.size()),
        sent_end(sample.document.size());
    int offset = 0;
    for (std::size_t s = 0; s < sample.document.size(); ++s) {
      sent_begin[s] = offset;
      offset += static_cast<int>(sample.document[s].tokens.size());
      sent_end[s] = offset;
    }

    const auto pred_spans = sentence_spans(selected, sent_begin, sent_end);
    const auto gold_spans = sentence_spans(match, sent_begin, sent_end);
    iou_pred_total += pred_spans.size();
    iou_gold_total += gold_spans.size();
    for (const auto& ps : pred_spans) {
      for (const auto& gs : gold_spans) {
        if (span_iou(ps, gs) >= 0.5) { ++iou_pred_matched; break; }
      }
    }
    for (const auto& gs : gold_spans) {
      for (const auto& ps : pred_spans) {
        if (span_iou(ps, gs) >= 0.5) { ++iou_gold_matched; break; }
      }
    }

    std::set<int> gold_tokens;
    auto add_tokens = [&](const std::set<int>& sentences) {
      for (int s : sentences)
        for (int t = sent_begin[s]; t < sent_end[s]; ++t)
          gold_tokens.insert(t);
    };
    if (opts.token_f1_all_golds) {
      for (const auto& g : sample.gold_rationales) add_tokens(g);
    } else {
      add_tokens(match);
    }
    std::set<int> pred_tokens;
    for (int s : selected)
      for (int t = sent_begin[s]; t < sent_end[s]; ++t) pred_tokens.insert(t);
    for (int t : pred_tokens) tok_inter += gold_tokens.count(t);
    tok_pred += pred_tokens.size();
    tok_gold += gold_tokens.size();
  }

  if (report.num_annotated > 0) {
    const double n = static_cast<double>(report.num_annotated);
    report.rationale_precision = p_sum / n;
    report.rationale_recall = r_sum / n;
    report.rationale_f1 = f1_sum / n;
    report.acc_full = full / n;
    report.acc_part = part / n;
  }
  report.iou_f1 = f1_from(safe_div(iou_pred_matched, iou_pred_total),
                          safe_div(iou_gold_matched, iou_gold_total));
  report.token_f1 = f1_from(safe_div(tok_inter, tok_pred),
                            safe_div(tok_inter, tok_gold));
  return report;
}

}  // namespace selrat
