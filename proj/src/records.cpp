#include "selrat/records.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace selrat {

using nlohmann::json;

void save_records(const std::vector<PredictionRecord>& records,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write records: " + path);
  for (const auto& rec : records) {
    json j;
    j["id"] = rec.sample_id;
    j["predicted_label"] = rec.predicted_label;
    j["selected_index"] = rec.selected_index;
    j["selected"] = rec.selected_candidate;
    json cands = json::array();
    for (const auto& c : rec.candidates) cands.push_back(c.indices);
    j["candidates"] = std::move(cands);
    j["weights"] = std::vector<double>(
        rec.weights.data(), rec.weights.data() + rec.weights.size());
    json logits = json::array();
    for (Eigen::Index i = 0; i < rec.logits.rows(); ++i) {
      std::vector<double> row(rec.logits.cols());
      for (Eigen::Index k = 0; k < rec.logits.cols(); ++k) {
        row[k] = rec.logits(i, k);
      }
      logits.push_back(row);
    }
    j["logits"] = std::move(logits);
    out << j.dump() << '\n';
  }
}

std::vector<PredictionRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records: " + path);
  std::vector<PredictionRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line);
    PredictionRecord rec;
    rec.sample_id = j.at("id").get<std::string>();
    rec.predicted_label = j.at("predicted_label").get<int>();
    rec.selected_index = j.at("selected_index").get<int>();
    rec.selected_candidate = j.at("selected").get<std::vector<int>>();
    for (const auto& c : j.at("candidates")) {
      rec.candidates.push_back(Candidate{c.get<std::vector<int>>()});
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    rec.weights = Eigen::Map<const Eigen::VectorXd>(
        w.data(), static_cast<Eigen::Index>(w.size()));
    const auto& logits = j.at("logits");
    if (!logits.empty()) {
      rec.logits.resize(logits.size(), logits[0].size());
      for (std::size_t i = 0; i < logits.size(); ++i) {
        const auto row = logits[i].get<std::vector<double>>();
        for (std::size_t k = 0; k < row.size(); ++k) {
          rec.logits(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(k)) = row[k];
        }
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace selrat
