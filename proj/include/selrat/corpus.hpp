#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace selrat {

// Tokens are lowercased surface forms; sentences keep their position in
// the document.
struct Sentence {
  std::vector<std::string> tokens;
  int index = 0;
};

struct Sample {
  std::string id;
  std::vector<std::string> query;
  std::vector<std::string> answer;  // empty unless the task keeps answers apart
  std::vector<Sentence> document;
  int label = 0;
  // Alternative gold rationales: each inner set is one sufficient set of
  // sentence indices. Empty when the sample is unannotated.
  std::vector<std::set<int>> gold_rationales;

  int num_sentences() const { return static_cast<int>(document.size()); }
};

// One rationale candidate: a sorted set of sentence indices. The empty
// vector is the query-only candidate.
struct Candidate {
  std::vector<int> indices;

  bool is_query_only() const { return indices.empty(); }
  bool operator==(const Candidate& o) const { return indices == o.indices; }
};

using CandidateSet = std::vector<Candidate>;

struct Dataset {
  std::vector<Sample> samples;
  int num_labels = 2;
  std::vector<std::string> label_names;            // id -> external name
  std::unordered_map<std::string, int> vocabulary; // token -> id, dense from 0

  std::size_t size() const { return samples.size(); }
};

inline constexpr const char* kUnknownToken = "<unk>";
inline constexpr int kUnknownId = 0;

// Whitespace-tokenize and lowercase; one sentence per line, blank lines
// dropped, indices assigned in order.
std::vector<Sentence> segment_document(const std::string& raw_text);

std::vector<std::string> tokenize(const std::string& line);

// Builds the token->id map from the given (training) dataset in place:
// id 0 is reserved for <unk>, remaining ids follow first-occurrence order
// over queries, answers and documents.
void build_vocabulary(Dataset& dataset);

int token_id(const Dataset& dataset, const std::string& token);

// ERASER ingestion: docs_dir holds one plain-text file per docid (one
// sentence per line), annotations is JSONL with annotation_id, query,
// classification and evidences. Each top-level evidence group becomes one
// alternative rationale set; sentence ranges inside a group are unioned.
Dataset import_eraser(const std::string& docs_dir,
                      const std::string& annotations_path,
                      const std::map<std::string, int>& label_map);

// Candidate 0 is the query-only candidate, then singletons in document
// order, then (h=2) unordered pairs {i,j}, i<j, lexicographically.
CandidateSet enumerate_candidates(const Sample& sample, int h);

struct CorpusStats {
  std::size_t num_samples = 0;
  std::size_t num_annotated = 0;
  double rationales_per_sample = 0.0;  // over annotated samples
  std::map<int, std::size_t> min_hops_histogram;
};

CorpusStats corpus_stats(const Dataset& dataset);

// Native JSONL format: one object per line with id, query, answer
// (optional), sentences, label (string), rationales.
Dataset load_jsonl(const std::string& path);
void save_jsonl(const Dataset& dataset, const std::string& path);

}  // namespace selrat
