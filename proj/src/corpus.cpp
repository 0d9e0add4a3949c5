#include "selrat/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace selrat {

using nlohmann::json;

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) {
    std::transform(tok.begin(), tok.end(), tok.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    tokens.push_back(tok);
  }
  return tokens;
}

std::vector<Sentence> segment_document(const std::string& raw_text) {
  std::vector<Sentence> sentences;
  std::istringstream iss(raw_text);
  std::string line;
  while (std::getline(iss, line)) {
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    Sentence s;
    s.tokens = std::move(tokens);
    s.index = static_cast<int>(sentences.size());
    sentences.push_back(std::move(s));
  }
  return sentences;
}

void build_vocabulary(Dataset& dataset) {
  dataset.vocabulary.clear();
  dataset.vocabulary[kUnknownToken] = kUnknownId;
  auto add = [&](const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) {
      dataset.vocabulary.emplace(t, static_cast<int>(dataset.vocabulary.size()));
    }
  };
  for (const auto& sample : dataset.samples) {
    add(sample.query);
    add(sample.answer);
    for (const auto& sentence : sample.document) add(sentence.tokens);
  }
}

int token_id(const Dataset& dataset, const std::string& token) {
  auto it = dataset.vocabulary.find(token);
  return it == dataset.vocabulary.end() ? kUnknownId : it->second;
}

namespace {

std::vector<Sentence> read_document_file(const std::filesystem::path& path,
                                         const std::string& docid) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("missing document file for docid '" + docid +
                             "': " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return segment_document(buffer.str());
}

}  // namespace

Dataset import_eraser(const std::string& docs_dir,
                      const std::string& annotations_path,
                      const std::map<std::string, int>& label_map) {
  std::ifstream in(annotations_path);
  if (!in) {
    throw std::runtime_error("cannot open annotations: " + annotations_path);
  }

  Dataset dataset;
  dataset.num_labels = 0;
  for (const auto& [name, id] : label_map) {
    dataset.num_labels = std::max(dataset.num_labels, id + 1);
  }
  dataset.label_names.assign(dataset.num_labels, "");
  for (const auto& [name, id] : label_map) dataset.label_names[id] = name;

  // Documents are shared across records; cache by docid.
  std::unordered_map<std::string, std::vector<Sentence>> doc_cache;

  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = json::parse(line);

    Sample sample;
    sample.id = record.at("annotation_id").get<std::string>();

    const std::string query_text = record.at("query").get<std::string>();
    // MultiRC packs "question || answer" into the query field.
    const auto sep = query_text.find("||");
    if (sep != std::string::npos) {
      sample.query = tokenize(query_text.substr(0, sep));
      sample.answer = tokenize(query_text.substr(sep + 2));
    } else {
      sample.query = tokenize(query_text);
    }
    if (sample.query.empty()) {
      throw std::runtime_error("empty query in record " + sample.id);
    }

    const std::string cls = record.at("classification").get<std::string>();
    auto label_it = label_map.find(cls);
    if (label_it == label_map.end()) {
      throw std::runtime_error("unknown classification '" + cls +
                               "' in record " + sample.id);
    }
    sample.label = label_it->second;

    std::string docid;
    for (const auto& group : record.at("evidences")) {
      std::set<int> rationale;
      for (const auto& ev : group) {
        docid = ev.at("docid").get<std::string>();
        const int start = ev.at("start_sentence").get<int>();
        const int end = ev.at("end_sentence").get<int>();
        for (int i = start; i < end; ++i) rationale.insert(i);
      }
      if (!rationale.empty()) sample.gold_rationales.push_back(rationale);
    }
    if (docid.empty() && record.contains("docids") &&
        !record.at("docids").empty()) {
      docid = record.at("docids")[0].get<std::string>();
    }
    if (docid.empty()) {
      // Fall back on the annotation id (Movies style: one doc per sample).
      docid = sample.id;
    }

    auto cached = doc_cache.find(docid);
    if (cached == doc_cache.end()) {
      auto doc = read_document_file(
          std::filesystem::path(docs_dir) / docid, docid);
      cached = doc_cache.emplace(docid, std::move(doc)).first;
    }
    sample.document = cached->second;

    for (const auto& rationale : sample.gold_rationales) {
      for (int idx : rationale) {
        if (idx < 0 || idx >= sample.num_sentences()) {
          throw std::runtime_error("out-of-range sentence index " +
                                   std::to_string(idx) + " in record " +
                                   sample.id);
        }
      }
    }
    dataset.samples.push_back(std::move(sample));
  }
  return dataset;
}

CandidateSet enumerate_candidates(const Sample& sample, int h) {
  if (h != 1 && h != 2) {
    throw std::invalid_argument("candidate size limit h must be 1 or 2, got " +
                                std::to_string(h));
  }
  const int n = sample.num_sentences();
  CandidateSet candidates;
  candidates.push_back(Candidate{});  // query-only
  for (int i = 0; i < n; ++i) candidates.push_back(Candidate{{i}});
  if (h == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) candidates.push_back(Candidate{{i, j}});
  }
  return candidates;
}

CorpusStats corpus_stats(const Dataset& dataset) {
  CorpusStats stats;
  stats.num_samples = dataset.samples.size();
  std::size_t total_rationales = 0;
  for (const auto& sample : dataset.samples) {
    if (sample.gold_rationales.empty()) continue;
    ++stats.num_annotated;
    total_rationales += sample.gold_rationales.size();
    std::size_t min_hops = sample.gold_rationales.front().size();
    for (const auto& g : sample.gold_rationales) {
      min_hops = std::min(min_hops, g.size());
    }
    ++stats.min_hops_histogram[static_cast<int>(min_hops)];
  }
  stats.rationales_per_sample =
      stats.num_annotated == 0
          ? 0.0
          : static_cast<double>(total_rationales) /
                static_cast<double>(stats.num_annotated);
  return stats;
}

Dataset load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  Dataset dataset;
  std::map<std::string, int> labels_seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = json::parse(line);

    Sample sample;
    sample.id = record.at("id").get<std::string>();
    sample.query = record.at("query").get<std::vector<std::string>>();
    if (record.contains("answer") && !record.at("answer").is_null()) {
      sample.answer = record.at("answer").get<std::vector<std::string>>();
    }
    int index = 0;
    for (const auto& sent : record.at("sentences")) {
      Sentence s;
      s.tokens = sent.get<std::vector<std::string>>();
      s.index = index++;
      sample.document.push_back(std::move(s));
    }
    const std::string label = record.at("label").get<std::string>();
    auto [it, inserted] =
        labels_seen.emplace(label, static_cast<int>(labels_seen.size()));
    sample.label = it->second;
    for (const auto& rationale : record.at("rationales")) {
      std::set<int> g;
      for (int idx : rationale.get<std::vector<int>>()) {
        if (idx < 0 || idx >= sample.num_sentences()) {
          throw std::runtime_error("rationale index out of range in sample " +
                                   sample.id);
        }
        g.insert(idx);
      }
      sample.gold_rationales.push_back(std::move(g));
    }
    dataset.samples.push_back(std::move(sample));
  }

  dataset.num_labels = std::max<std::size_t>(labels_seen.size(), 1);
  dataset.label_names.assign(dataset.num_labels, "");
  for (const auto& [name, id] : labels_seen) dataset.label_names[id] = name;
  // Remap labels so external names are in sorted order regardless of the
  // order records appear in.
  std::map<std::string, int> sorted_ids;
  for (const auto& [name, id] : labels_seen) {
    sorted_ids.emplace(name, static_cast<int>(sorted_ids.size()));
  }
  if (sorted_ids != labels_seen) {
    std::vector<int> remap(labels_seen.size());
    for (const auto& [name, id] : labels_seen) remap[id] = sorted_ids[name];
    for (auto& sample : dataset.samples) sample.label = remap[sample.label];
    for (const auto& [name, id] : sorted_ids) dataset.label_names[id] = name;
  }
  return dataset;
}

void save_jsonl(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& sample : dataset.samples) {
    json record;
    record["id"] = sample.id;
    record["query"] = sample.query;
    if (!sample.answer.empty()) record["answer"] = sample.answer;
    json sentences = json::array();
    for (const auto& s : sample.document) sentences.push_back(s.tokens);
    record["sentences"] = std::move(sentences);
    record["label"] = sample.label < static_cast<int>(dataset.label_names.size())
                          ? dataset.label_names[sample.label]
                          : std::to_string(sample.label);
    json rationales = json::array();
    for (const auto& g : sample.gold_rationales) {
      rationales.push_back(std::vector<int>(g.begin(), g.end()));
    }
    record["rationales"] = std::move(rationales);
    out << record.dump() << '\n';
  }
}

}  // namespace selrat
