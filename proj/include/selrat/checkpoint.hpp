#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "selrat/encoder.hpp"

namespace selrat {

// Versioned JSON container: config header (d, d_h, t, vocab_size), the
// flat parameter arrays in row-major order (embedding, null_sentence, W1,
// b1, W2, b2), the training vocabulary and label names, and the inference
// settings (h, tau) the model was trained with.
struct Checkpoint {
  static constexpr int kVersion = 1;
  Params<float> params;
  std::unordered_map<std::string, int> vocabulary;
  std::vector<std::string> label_names;
  int h = 1;
  double tau = 1.0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace selrat
