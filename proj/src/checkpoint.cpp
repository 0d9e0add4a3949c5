#include "selrat/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace selrat {

using nlohmann::json;

namespace {

json flat(const Eigen::MatrixXf& m) {
  std::vector<double> out;
  out.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out.push_back(static_cast<double>(m(i, j)));
  return json(out);
}

json flat(const Eigen::VectorXf& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  return json(out);
}

void unflat(const json& a, Eigen::MatrixXf& m, Eigen::Index rows,
            Eigen::Index cols) {
  if (static_cast<Eigen::Index>(a.size()) != rows * cols) {
    throw std::runtime_error("checkpoint array size mismatch");
  }
  m.resize(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = static_cast<float>(a[k++].get<double>());
}

void unflat(const json& a, Eigen::VectorXf& v, Eigen::Index n) {
  if (static_cast<Eigen::Index>(a.size()) != n) {
    throw std::runtime_error("checkpoint array size mismatch");
  }
  v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = static_cast<float>(a[i].get<double>());
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  ckpt.params.check_shapes();
  const auto cfg = ckpt.params.config();
  json j;
  j["version"] = Checkpoint::kVersion;
  j["config"] = {{"vocab_size", cfg.vocab_size},
                 {"embed_dim", cfg.embed_dim},
                 {"hidden_dim", cfg.hidden_dim},
                 {"num_labels", cfg.num_labels},
                 {"h", ckpt.h},
                 {"tau", ckpt.tau}};
  j["embedding"] = flat(ckpt.params.embedding);
  j["null_sentence"] = flat(ckpt.params.null_sentence);
  j["W1"] = flat(ckpt.params.W1);
  j["b1"] = flat(ckpt.params.b1);
  j["W2"] = flat(ckpt.params.W2);
  j["b2"] = flat(ckpt.params.b2);
  j["vocabulary"] = ckpt.vocabulary;
  j["label_names"] = ckpt.label_names;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  in >> j;
  if (j.at("version").get<int>() != Checkpoint::kVersion) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  const auto& c = j.at("config");
  const int vocab_size = c.at("vocab_size").get<int>();
  const int d = c.at("embed_dim").get<int>();
  const int d_h = c.at("hidden_dim").get<int>();
  const int t = c.at("num_labels").get<int>();

  Checkpoint ckpt;
  ckpt.h = c.at("h").get<int>();
  ckpt.tau = c.at("tau").get<double>();
  unflat(j.at("embedding"), ckpt.params.embedding, vocab_size, d);
  unflat(j.at("null_sentence"), ckpt.params.null_sentence, d);
  unflat(j.at("W1"), ckpt.params.W1, 2 * d, d_h);
  unflat(j.at("b1"), ckpt.params.b1, d_h);
  unflat(j.at("W2"), ckpt.params.W2, d_h, t);
  unflat(j.at("b2"), ckpt.params.b2, t);
  ckpt.vocabulary =
      j.at("vocabulary").get<std::unordered_map<std::string, int>>();
  ckpt.label_names = j.at("label_names").get<std::vector<std::string>>();
  ckpt.params.check_shapes();
  return ckpt;
}

}  // namespace selrat
