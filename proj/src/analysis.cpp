#include "selrat/analysis.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace selrat {

std::string category_name(LogitCategory c) {
  switch (c) {
    case LogitCategory::kSelectedCorrect: return "selected-correct";
    case LogitCategory::kSelectedIncorrect: return "selected-incorrect";
    case LogitCategory::kUnselected: return "unselected";
    case LogitCategory::kQueryOnly: return "query-only";
  }
  return "?";
}

namespace {

std::string candidate_label(const Candidate& c) {
  if (c.indices.empty()) return "-";
  std::string out = std::to_string(c.indices[0]);
  for (std::size_t i = 1; i < c.indices.size(); ++i) {
    out += "+" + std::to_string(c.indices[i]);
  }
  return out;
}

bool intersects_gold(const std::vector<int>& indices, const Sample& sample) {
  for (const auto& gold : sample.gold_rationales) {
    for (int i : indices) {
      if (gold.count(i)) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<AnalysisRow> normalized_logits(
    const std::vector<PredictionRecord>& records, const Dataset& dataset) {
  if (records.size() != dataset.samples.size()) {
    throw std::invalid_argument("normalized_logits: records/dataset mismatch");
  }
  std::vector<AnalysisRow> rows;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& rec = records[k];
    const Sample& sample = dataset.samples[k];
    for (std::size_t i = 0; i < rec.candidates.size(); ++i) {
      AnalysisRow row;
      row.sample_id = rec.sample_id;
      row.candidate = candidate_label(rec.candidates[i]);
      row.value = rec.logits.row(static_cast<Eigen::Index>(i)).maxCoeff();
      if (rec.candidates[i].indices.empty()) {
        row.category = LogitCategory::kQueryOnly;
      } else if (static_cast<int>(i) == rec.selected_index) {
        row.category = intersects_gold(rec.candidates[i].indices, sample)
                           ? LogitCategory::kSelectedCorrect
                           : LogitCategory::kSelectedIncorrect;
      } else {
        row.category = LogitCategory::kUnselected;
      }
      lo = std::min(lo, row.value);
      hi = std::max(hi, row.value);
      rows.push_back(std::move(row));
    }
  }
  if (rows.size() < 2 || hi == lo) {
    throw std::runtime_error(
        "normalized_logits: need at least two distinct logit values");
  }
  for (auto& row : rows) row.value = (row.value - lo) / (hi - lo);
  return rows;
}

std::vector<OverlapRow> overlap_distribution(
    const std::vector<PredictionRecord>& records, const Dataset& dataset,
    const std::set<std::string>& stoplist) {
  if (records.size() != dataset.samples.size()) {
    throw std::invalid_argument(
        "overlap_distribution: records/dataset mismatch");
  }
  std::vector<OverlapRow> rows;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& rec = records[k];
    const Sample& sample = dataset.samples[k];
    OverlapRow row;
    row.sample_id = rec.sample_id;
    row.predicted_label = rec.predicted_label;
    if (rec.selected_candidate.empty()) {
      row.query_only = true;
    } else {
      std::vector<std::string> tokens;
      for (int s : rec.selected_candidate) {
        const auto& st = sample.document.at(s).tokens;
        tokens.insert(tokens.end(), st.begin(), st.end());
      }
      const auto f = overlap_features(tokens, sample.query, sample.answer,
                                      stoplist, OverlapMode::kRelative);
      row.q_overlap_rel = f.q_s;
      row.a_overlap_rel = f.a_s;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SolvabilityGroup> solvability_split(
    const std::vector<std::vector<bool>>& per_model_correctness,
    const Dataset& dataset,
    const std::vector<PredictionRecord>& eval_records) {
  const std::size_t n = dataset.samples.size();
  for (const auto& v : per_model_correctness) {
    if (v.size() != n) {
      throw std::invalid_argument("solvability_split: vector length mismatch");
    }
  }
  if (eval_records.size() != n) {
    throw std::invalid_argument("solvability_split: records length mismatch");
  }
  const int k = static_cast<int>(per_model_correctness.size());

  std::vector<SolvabilityGroup> groups(k + 1);
  for (int g = 0; g <= k; ++g) groups[g].solved_by = g;
  for (std::size_t i = 0; i < n; ++i) {
    int solved = 0;
    for (const auto& v : per_model_correctness) solved += v[i] ? 1 : 0;
    groups[solved].sample_indices.push_back(i);
  }

  std::vector<int> all_pred, all_gold;
  for (std::size_t i = 0; i < n; ++i) {
    all_pred.push_back(eval_records[i].predicted_label);
    all_gold.push_back(dataset.samples[i].label);
  }
  const double full_f1a =
      target_metrics(all_pred, all_gold, dataset.num_labels).f1a;

  for (auto& group : groups) {
    std::vector<int> pred, gold;
    for (std::size_t i : group.sample_indices) {
      pred.push_back(eval_records[i].predicted_label);
      gold.push_back(dataset.samples[i].label);
    }
    group.f1a = pred.empty()
                    ? 0.0
                    : target_metrics(pred, gold, dataset.num_labels).f1a;
    group.delta_f1a = group.f1a - full_f1a;
  }
  return groups;
}

StabilityTable pair_stability(
    const std::vector<PredictionRecord>& pair_records,
    const std::vector<PredictionRecord>& single_records,
    const Dataset& dataset) {
  if (pair_records.size() != single_records.size() ||
      pair_records.size() != dataset.samples.size()) {
    throw std::invalid_argument("pair_stability: length mismatch");
  }
  StabilityTable table;
  for (std::size_t k = 0; k < pair_records.size(); ++k) {
    const auto& pair = pair_records[k];
    const auto& single = single_records[k];
    if (pair.selected_candidate.size() != 2 ||
        single.selected_candidate.size() != 1) {
      ++table.skipped;
      continue;
    }
    const int shared = single.selected_candidate[0];
    const int a = pair.selected_candidate[0];
    const int b = pair.selected_candidate[1];
    if (shared != a && shared != b) {
      ++table.skipped;
      continue;
    }
    const int fresh = shared == a ? b : a;
    const int joint_label = pair.predicted_label;
    if (joint_label < 0 || joint_label > 1) {
      throw std::invalid_argument("pair_stability expects binary labels");
    }

    auto singleton_prediction = [&](int sentence) {
      for (std::size_t i = 0; i < pair.candidates.size(); ++i) {
        const auto& idx = pair.candidates[i].indices;
        if (idx.size() == 1 && idx[0] == sentence) {
          int label = 0;
          for (Eigen::Index j = 1; j < pair.logits.cols(); ++j) {
            if (pair.logits(static_cast<Eigen::Index>(i), j) >
                pair.logits(static_cast<Eigen::Index>(i), label)) {
              label = static_cast<int>(j);
            }
          }
          return label;
        }
      }
      throw std::runtime_error("pair_stability: singleton candidate missing");
    };

    for (int which = 0; which < 2; ++which) {
      const int sentence = which == 0 ? shared : fresh;
      auto& cell = table.cells[joint_label][which];
      ++cell.total;
      if (singleton_prediction(sentence) == joint_label) ++cell.unchanged;
    }
  }
  return table;
}

}  // namespace selrat
