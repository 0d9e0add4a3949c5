#include "selrat/synthgen.hpp"

#include <algorithm>
#include <stdexcept>

#include "selrat/rng.hpp"

namespace selrat {

SynthFamily parse_family(const std::string& name) {
  if (name == "single_evidence") return SynthFamily::kSingleEvidence;
  if (name == "two_hop") return SynthFamily::kTwoHop;
  if (name == "discussion") return SynthFamily::kDiscussion;
  throw std::invalid_argument("unknown synthetic family: " + name);
}

std::string family_name(SynthFamily family) {
  switch (family) {
    case SynthFamily::kSingleEvidence: return "single_evidence";
    case SynthFamily::kTwoHop: return "two_hop";
    case SynthFamily::kDiscussion: return "discussion";
  }
  return "?";
}

namespace {

constexpr int kNumEntities = 8;
constexpr int kNumBridges = 4;
constexpr int kNumSentiment = 4;  // per polarity
constexpr int kNumVerdict = 8;    // per verdict pool

std::string distractor(int i) { return "w" + std::to_string(i); }

std::string draw_distractor(Rng& rng, int pool) {
  return distractor(static_cast<int>(rng.next_below(pool)));
}

// Balanced label sequence (counts within 1), deterministically shuffled.
std::vector<int> balanced_labels(int num_samples, int num_labels, Rng& rng) {
  std::vector<int> labels(num_samples);
  for (int i = 0; i < num_samples; ++i) labels[i] = i % num_labels;
  rng.shuffle(labels);
  return labels;
}

void validate(const SynthConfig& cfg, int reserved, int min_sentence_len,
              int min_sentences) {
  if (cfg.num_samples < 1 || cfg.sentences_per_doc < 1 || cfg.query_len < 1 ||
      cfg.sentence_len < 1 || cfg.num_labels < 1) {
    throw std::invalid_argument("synth config counts must be >= 1");
  }
  if (cfg.vocab_size <= cfg.num_labels) {
    throw std::invalid_argument("vocab_size must exceed num_labels");
  }
  if (cfg.vocab_size <= reserved) {
    throw std::invalid_argument("vocab_size too small for the signal tokens");
  }
  if (cfg.sentence_len < min_sentence_len) {
    throw std::invalid_argument("sentence_len too small for this family");
  }
  if (cfg.sentences_per_doc < min_sentences) {
    throw std::invalid_argument("sentences_per_doc too small for this family");
  }
}

Dataset make_dataset(int num_labels) {
  Dataset ds;
  ds.num_labels = num_labels;
  for (int l = 0; l < num_labels; ++l) {
    ds.label_names.push_back("label" + std::to_string(l));
  }
  return ds;
}

std::vector<std::string> distractor_sentence(Rng& rng, int len, int pool) {
  std::vector<std::string> tokens;
  tokens.reserve(len);
  for (int i = 0; i < len; ++i) tokens.push_back(draw_distractor(rng, pool));
  return tokens;
}

void pad(std::vector<std::string>& tokens, Rng& rng, int len, int pool) {
  while (static_cast<int>(tokens.size()) < len) {
    tokens.push_back(draw_distractor(rng, pool));
  }
}

void push_sentence(Sample& sample, std::vector<std::string> tokens) {
  Sentence s;
  s.tokens = std::move(tokens);
  s.index = sample.num_sentences();
  sample.document.push_back(std::move(s));
}

}  // namespace

Dataset gen_single_evidence(const SynthConfig& cfg) {
  const int reserved = cfg.num_labels + kNumEntities;
  validate(cfg, reserved, 2, 1);
  const int pool = cfg.vocab_size - reserved;

  Rng rng(cfg.seed);
  Dataset ds = make_dataset(cfg.num_labels);
  const auto labels = balanced_labels(cfg.num_samples, cfg.num_labels, rng);

  for (int k = 0; k < cfg.num_samples; ++k) {
    Sample sample;
    sample.id = "single-" + std::to_string(k);
    sample.label = labels[k];

    const std::string entity =
        "ent" + std::to_string(rng.next_below(kNumEntities));
    sample.query.push_back(entity);
    pad(sample.query, rng, cfg.query_len, pool);

    const int evidence_pos =
        static_cast<int>(rng.next_below(cfg.sentences_per_doc));
    for (int s = 0; s < cfg.sentences_per_doc; ++s) {
      if (s == evidence_pos) {
        std::vector<std::string> tokens{
            entity, "sig" + std::to_string(sample.label)};
        pad(tokens, rng, cfg.sentence_len, pool);
        push_sentence(sample, std::move(tokens));
      } else {
        push_sentence(sample,
                      distractor_sentence(rng, cfg.sentence_len, pool));
      }
    }
    sample.gold_rationales.push_back({evidence_pos});
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

Dataset gen_two_hop(const SynthConfig& cfg) {
  if (cfg.num_labels != 2) {
    throw std::invalid_argument("two_hop requires num_labels = 2");
  }
  const int reserved = kNumEntities + kNumBridges + 4;  // + valA/valB pairs
  validate(cfg, reserved, 3, 2);
  const int pool = cfg.vocab_size - reserved;

  Rng rng(cfg.seed);
  Dataset ds = make_dataset(2);
  const auto labels = balanced_labels(cfg.num_samples, 2, rng);

  for (int k = 0; k < cfg.num_samples; ++k) {
    Sample sample;
    sample.id = "twohop-" + std::to_string(k);
    sample.label = labels[k];

    const std::string entity =
        "ent" + std::to_string(rng.next_below(kNumEntities));
    const std::string bridge =
        "brg" + std::to_string(rng.next_below(kNumBridges));
    // label = a XOR c with a uniform, so each hop alone is uninformative.
    const int a = static_cast<int>(rng.next_below(2));
    const int c = sample.label ^ a;

    sample.query.push_back(entity);
    pad(sample.query, rng, cfg.query_len, pool);

    int pos_bridge = static_cast<int>(rng.next_below(cfg.sentences_per_doc));
    int pos_second =
        static_cast<int>(rng.next_below(cfg.sentences_per_doc - 1));
    if (pos_second >= pos_bridge) ++pos_second;

    for (int s = 0; s < cfg.sentences_per_doc; ++s) {
      if (s == pos_bridge) {
        std::vector<std::string> tokens{entity, bridge,
                                        "vala" + std::to_string(a)};
        pad(tokens, rng, cfg.sentence_len, pool);
        push_sentence(sample, std::move(tokens));
      } else if (s == pos_second) {
        std::vector<std::string> tokens{bridge, "valc" + std::to_string(c)};
        pad(tokens, rng, cfg.sentence_len, pool);
        push_sentence(sample, std::move(tokens));
      } else {
        push_sentence(sample,
                      distractor_sentence(rng, cfg.sentence_len, pool));
      }
    }
    sample.gold_rationales.push_back({pos_bridge, pos_second});
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

Dataset gen_discussion(const SynthConfig& cfg) {
  if (cfg.num_labels != 2) {
    throw std::invalid_argument("discussion requires num_labels = 2");
  }
  // marker + query head + sentiment pools + verdict-signal pools
  const int reserved = 2 + 2 * kNumSentiment + 2 * kNumVerdict;
  validate(cfg, reserved, 3, 6);
  const int pool = cfg.vocab_size - reserved;

  Rng rng(cfg.seed);
  Dataset ds = make_dataset(2);
  const auto labels = balanced_labels(cfg.num_samples, 2, rng);

  auto sentiment = [&](int polarity) {
    return (polarity == 1 ? "pos" : "neg") +
           std::to_string(rng.next_below(kNumSentiment));
  };

  for (int k = 0; k < cfg.num_samples; ++k) {
    Sample sample;
    sample.id = "disc-" + std::to_string(k);
    sample.label = labels[k];  // 0 = negative, 1 = positive

    sample.query.push_back("q");
    pad(sample.query, rng, cfg.query_len, pool);

    // Both labels carry evidence for both polarities; the composition is
    // label-skewed, which is what lures a sentiment-token shortcut.
    const int k_pos = sample.label == 1 ? 4 : 2;
    const int k_neg = sample.label == 1 ? 1 : 3;

    std::vector<int> positions(cfg.sentences_per_doc);
    for (int i = 0; i < cfg.sentences_per_doc; ++i) positions[i] = i;
    rng.shuffle(positions);
    const int verdict_pos = positions[0];
    std::vector<int> role(cfg.sentences_per_doc, 0);  // 0 distractor
    role[verdict_pos] = 3;
    for (int i = 0; i < k_pos; ++i) role[positions[1 + i]] = 1;
    std::vector<int> neg_positions;
    for (int i = 0; i < k_neg; ++i) {
      role[positions[1 + k_pos + i]] = 2;
      neg_positions.push_back(positions[1 + k_pos + i]);
    }

    for (int s = 0; s < cfg.sentences_per_doc; ++s) {
      std::vector<std::string> tokens;
      switch (role[s]) {
        case 1:
          tokens = {sentiment(1), sentiment(1)};
          break;
        case 2:
          tokens = {sentiment(0), sentiment(0)};
          break;
        case 3: {
          // The verdict vocabulary is disjoint from the sentiment pools and
          // the label is the parity of a token pair, so no single verdict
          // token correlates with the label; reading the verdict takes a
          // nonlinear combination while the sentiment shortcut is linear.
          const int i = static_cast<int>(rng.next_below(kNumVerdict));
          const int j =
              2 * static_cast<int>(rng.next_below(kNumVerdict / 2)) +
              (sample.label + i) % 2;
          tokens = {"verdict", "va" + std::to_string(i),
                    "vb" + std::to_string(j)};
          break;
        }
        default:
          break;
      }
      pad(tokens, rng, cfg.sentence_len, pool);
      push_sentence(sample, std::move(tokens));
    }
    // Positive reviews are justified only by the verdict; negative ones
    // accept any negative-evidence sentence as an alternative rationale.
    // That asymmetry is what the evaluation probes: a model that leans on
    // the sentiment shortcut looks faithful on one class only.
    sample.gold_rationales.push_back({verdict_pos});
    if (sample.label == 0) {
      std::sort(neg_positions.begin(), neg_positions.end());
      for (int p : neg_positions) sample.gold_rationales.push_back({p});
    }
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

Dataset generate(const SynthConfig& cfg) {
  switch (cfg.family) {
    case SynthFamily::kSingleEvidence: return gen_single_evidence(cfg);
    case SynthFamily::kTwoHop: return gen_two_hop(cfg);
    case SynthFamily::kDiscussion: return gen_discussion(cfg);
  }
  throw std::invalid_argument("unknown family");
}

}  // namespace selrat
