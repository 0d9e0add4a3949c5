#pragma once

#include <string>
#include <vector>

#include "selrat/metrics.hpp"

namespace selrat {

// JSONL prediction records: id, predicted_label, selected (indices),
// candidates, weights, logits (row-major per candidate). These feed the
// analysis exports.
void save_records(const std::vector<PredictionRecord>& records,
                  const std::string& path);
std::vector<PredictionRecord> load_records(const std::string& path);

}  // namespace selrat
