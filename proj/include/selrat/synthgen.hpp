#pragma once

#include <cstdint>
#include <string>

#include "selrat/corpus.hpp"

namespace selrat {

enum class SynthFamily { kSingleEvidence, kTwoHop, kDiscussion };

SynthFamily parse_family(const std::string& name);
std::string family_name(SynthFamily family);

// All outputs are pure functions of this config; the generator draws from
// the SplitMix64 counter stream seeded here, so identical configs are
// byte-identical across runs and platforms.
struct SynthConfig {
  int num_samples = 1000;
  int vocab_size = 200;
  int sentences_per_doc = 8;
  int query_len = 4;
  int sentence_len = 6;
  int num_labels = 2;
  std::uint64_t seed = 1;
  SynthFamily family = SynthFamily::kSingleEvidence;
};

// One evidence sentence carries the label signal conditioned on the query
// entity; every other sentence is drawn from a label-independent
// distractor pool. gold = {evidence index}.
Dataset gen_single_evidence(const SynthConfig& config);

// The label is the parity of two hidden values split across a bridge
// sentence (query entity + link + value A) and a second sentence (link +
// value B); either sentence alone carries no label information.
// gold = {bridge index, second index}.
Dataset gen_two_hop(const SynthConfig& config);

// Discussion-style documents: sentiment-evidence sentences of both
// polarities appear in documents of both labels with a label-skewed
// composition; only a marked verdict sentence, written in a vocabulary
// disjoint from the sentiment pools, determines the label. Positive
// samples take gold = {verdict index}; negative samples additionally
// accept each negative-evidence sentence as an alternative gold set.
Dataset gen_discussion(const SynthConfig& config);

Dataset generate(const SynthConfig& config);

}  // namespace selrat
