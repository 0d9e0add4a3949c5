#pragma once

#include <set>
#include <string>
#include <vector>

#include "selrat/baseline.hpp"
#include "selrat/corpus.hpp"
#include "selrat/metrics.hpp"

namespace selrat {

enum class LogitCategory {
  kSelectedCorrect,
  kSelectedIncorrect,
  kUnselected,
  kQueryOnly
};

std::string category_name(LogitCategory c);

struct AnalysisRow {
  std::string sample_id;
  std::string candidate;  // "-" for query-only, else "i" or "i+j"
  LogitCategory category = LogitCategory::kUnselected;
  double value = 0;
};

// Selected-class logit of every candidate of every sample, min-max
// normalized over the whole split. Selected candidates are tagged correct
// when they intersect a gold rationale.
std::vector<AnalysisRow> normalized_logits(
    const std::vector<PredictionRecord>& records, const Dataset& dataset);

struct OverlapRow {
  std::string sample_id;
  double q_overlap_rel = 0;
  double a_overlap_rel = 0;
  int predicted_label = 0;
  bool query_only = false;
};

// Relative question/answer overlap of the selected sentence(s) (token
// union for pairs), paired with the predicted label.
std::vector<OverlapRow> overlap_distribution(
    const std::vector<PredictionRecord>& records, const Dataset& dataset,
    const std::set<std::string>& stoplist);

struct SolvabilityGroup {
  int solved_by = 0;  // number of reference models that solved the sample
  std::vector<std::size_t> sample_indices;
  double f1a = 0;        // of the evaluated model on this group
  double delta_f1a = 0;  // group f1a minus full-split f1a
};

// Partition the split by how many of the k reference models classified
// each sample correctly; scores eval_records per group.
std::vector<SolvabilityGroup> solvability_split(
    const std::vector<std::vector<bool>>& per_model_correctness,
    const Dataset& dataset, const std::vector<PredictionRecord>& eval_records);

struct StabilityCell {
  std::size_t unchanged = 0;
  std::size_t total = 0;

  double fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(unchanged) / total;
  }
};

struct StabilityTable {
  // [joint prediction label][0 = shared sentence, 1 = new sentence]
  StabilityCell cells[2][2];
  std::size_t skipped = 0;  // samples without an eligible pair selection
};

// For h=2 selections sharing one sentence with the reference model's
// single-sentence pick: does predicting from each constituent row alone
// keep the joint prediction?
StabilityTable pair_stability(
    const std::vector<PredictionRecord>& pair_records,
    const std::vector<PredictionRecord>& single_records,
    const Dataset& dataset);

}  // namespace selrat
