#pragma once

#include <vector>

#include "selrat/encoder.hpp"
#include "selrat/metrics.hpp"
#include "selrat/objective.hpp"

namespace selrat {

// Runs the model over one sample and materializes the prediction record
// (weights and logits are kept for the analysis exports).
template <typename Scalar>
PredictionRecord predict_sample(const Params<Scalar>& params,
                                const Dataset& dataset, const Sample& sample,
                                int h, double tau) {
  const auto candidates = enumerate_candidates(sample, h);
  auto [z, cache] = encode_candidates(params, dataset, sample, candidates);
  const auto c = confidences<Scalar>(z);
  const auto w = weights<Scalar>(c, tau);

  PredictionRecord rec;
  rec.sample_id = sample.id;
  rec.candidates = candidates;
  rec.logits = z.template cast<double>();
  rec.weights = w.template cast<double>();
  const auto [label, cand] = predict(rec.logits, rec.weights);
  rec.predicted_label = label;
  rec.selected_index = cand;
  rec.selected_candidate = candidates[cand].indices;
  return rec;
}

template <typename Scalar>
std::vector<PredictionRecord> predict_dataset(const Params<Scalar>& params,
                                              const Dataset& dataset, int h,
                                              double tau) {
  std::vector<PredictionRecord> records;
  records.reserve(dataset.samples.size());
  for (const auto& sample : dataset.samples) {
    records.push_back(predict_sample(params, dataset, sample, h, tau));
  }
  return records;
}

}  // namespace selrat
