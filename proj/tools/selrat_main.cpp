#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "selrat/analysis.hpp"
#include "selrat/baseline.hpp"
#include "selrat/checkpoint.hpp"
#include "selrat/corpus.hpp"
#include "selrat/inference.hpp"
#include "selrat/records.hpp"
#include "selrat/runconfig.hpp"
#include "selrat/synthgen.hpp"
#include "selrat/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace selrat;

namespace {

void apply_overrides(RunConfig& cfg,
                     const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("--set expects key=value, got: " + kv);
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write history: " + path);
  out << "step,loss,f1a,acc,rationale_p,rationale_r,rationale_f1,"
         "acc_full,acc_part\n";
  out << std::setprecision(10);
  for (const auto& rec : history.records) {
    out << rec.step << ',' << rec.train_loss << ',' << rec.val.f1a << ','
        << rec.val.accuracy << ',' << rec.val.rationale_precision << ','
        << rec.val.rationale_recall << ',' << rec.val.rationale_f1 << ','
        << rec.val.acc_full << ',' << rec.val.acc_part << '\n';
  }
}

json report_json(const MetricReport& r) {
  return json{{"f1a", r.f1a},
              {"accuracy", r.accuracy},
              {"rationale_precision", r.rationale_precision},
              {"rationale_recall", r.rationale_recall},
              {"rationale_f1", r.rationale_f1},
              {"acc_full", r.acc_full},
              {"acc_part", r.acc_part},
              {"iou_f1", r.iou_f1},
              {"token_f1", r.token_f1},
              {"num_samples", r.num_samples},
              {"num_annotated", r.num_annotated}};
}

// Attach the checkpoint's vocabulary/labels to a freshly loaded dataset.
Dataset bind_dataset(const Checkpoint& ckpt, const std::string& path) {
  Dataset data = load_jsonl(path);
  if (static_cast<int>(ckpt.label_names.size()) < data.num_labels) {
    throw std::runtime_error(
        "checkpoint/dataset mismatch: dataset has more labels than the "
        "checkpoint was trained with");
  }
  // Remap dataset labels onto checkpoint label order.
  std::map<std::string, int> ckpt_ids;
  for (std::size_t i = 0; i < ckpt.label_names.size(); ++i) {
    ckpt_ids[ckpt.label_names[i]] = static_cast<int>(i);
  }
  for (auto& sample : data.samples) {
    const std::string& name = data.label_names[sample.label];
    auto it = ckpt_ids.find(name);
    if (it == ckpt_ids.end()) {
      throw std::runtime_error("checkpoint/dataset mismatch: label '" + name +
                               "' unknown to the checkpoint");
    }
    sample.label = it->second;
  }
  data.label_names = ckpt.label_names;
  data.num_labels = static_cast<int>(ckpt.label_names.size());
  data.vocabulary = ckpt.vocabulary;
  return data;
}

void write_per_sample_csv(const std::vector<PredictionRecord>& records,
                          const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "id,gold_label,predicted_label,selected,weight\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    std::string sel = "-";
    if (!rec.selected_candidate.empty()) {
      sel = std::to_string(rec.selected_candidate[0]);
      for (std::size_t k = 1; k < rec.selected_candidate.size(); ++k) {
        sel += "+" + std::to_string(rec.selected_candidate[k]);
      }
    }
    out << rec.sample_id << ',' << data.samples[i].label << ','
        << rec.predicted_label << ',' << sel << ','
        << rec.weights(rec.selected_index) << '\n';
  }
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

struct TrainedRun {
  Params<float> params;
  TrainHistory history;
  Dataset train;  // carries the vocabulary
};

TrainedRun run_training(const RunConfig& cfg, const std::string& train_path,
                        const std::string& val_path) {
  TrainedRun run;
  run.train = load_jsonl(train_path);
  build_vocabulary(run.train);
  Dataset val = load_jsonl(val_path);
  const TrainConfig tc = train_config_from(cfg);
  const EncoderConfig ec = encoder_config_from(cfg, run.train);
  auto params = Params<float>::init(ec, tc.seed);
  std::tie(run.params, run.history) = train(run.train, val, params, tc);
  return run;
}

int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides,
              const std::string& train_path, const std::string& val_path,
              const std::string& out_dir) {
  RunConfig cfg = config_path.empty() ? RunConfig()
                                      : RunConfig::from_file(config_path);
  apply_overrides(cfg, overrides);
  cfg.validate_keys(train_config_keys());

  fs::create_directories(out_dir);
  auto run = run_training(cfg, train_path, val_path);
  const TrainConfig tc = train_config_from(cfg);

  Checkpoint ckpt;
  ckpt.params = run.params;
  ckpt.vocabulary = run.train.vocabulary;
  ckpt.label_names = run.train.label_names;
  ckpt.h = tc.h;
  ckpt.tau = tc.objective.tau;
  const fs::path dir(out_dir);
  save_checkpoint(ckpt, (dir / "checkpoint.json").string());
  write_history_csv(run.history, (dir / "history.csv").string());
  std::ofstream((dir / "config.txt").string()) << cfg.echo();

  json manifest;
  manifest["command"] = "train";
  manifest["train"] = train_path;
  manifest["val"] = val_path;
  manifest["outputs"] = {"checkpoint.json", "history.csv", "config.txt"};
  std::ofstream((dir / "manifest.json").string()) << manifest.dump(2) << '\n';

  if (!run.history.records.empty()) {
    const auto& last = run.history.records.back();
    std::cout << "trained: steps=" << last.step
              << " val_f1a=" << last.val.f1a
              << " val_acc=" << last.val.accuracy << '\n';
  }
  return 0;
}

int cmd_learning_curve(const std::string& config_path,
                       const std::vector<std::string>& overrides,
                       const std::string& train_path,
                       const std::string& val_path,
                       const std::string& fractions_csv,
                       const std::string& seeds_csv,
                       const std::string& out_path) {
  RunConfig base = config_path.empty() ? RunConfig()
                                       : RunConfig::from_file(config_path);
  apply_overrides(base, overrides);
  base.validate_keys(train_config_keys());

  const auto fractions = parse_list(fractions_csv);
  const auto seeds = parse_seeds(seeds_csv);
  if (fractions.empty() || seeds.empty()) {
    throw std::runtime_error("learning-curve needs fractions and seeds");
  }

  Dataset full_train = load_jsonl(train_path);
  Dataset val = load_jsonl(val_path);

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write: " + out_path);
  out << "fraction,seed,f1a,acc,rationale_f1\n";
  out << std::setprecision(10);

  for (double fraction : fractions) {
    double f1a_sum = 0, acc_sum = 0, rf1_sum = 0;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.set("seed", std::to_string(seed));
      Dataset sub = subsample(full_train, fraction, seed);
      build_vocabulary(sub);
      const TrainConfig tc = train_config_from(cfg);
      const EncoderConfig ec = encoder_config_from(cfg, sub);
      auto [params, history] =
          train(sub, val, Params<float>::init(ec, tc.seed), tc);
      Dataset bound_val = val;
      bound_val.vocabulary = sub.vocabulary;
      const auto records =
          predict_dataset(params, bound_val, tc.h, tc.objective.tau);
      const auto report = evaluate(records, bound_val);
      out << fraction << ',' << seed << ',' << report.f1a << ','
          << report.accuracy << ',' << report.rationale_f1 << '\n';
      f1a_sum += report.f1a;
      acc_sum += report.accuracy;
      rf1_sum += report.rationale_f1;
    }
    const double n = static_cast<double>(seeds.size());
    out << fraction << ",mean," << f1a_sum / n << ',' << acc_sum / n << ','
        << rf1_sum / n << '\n';
  }
  return 0;
}

int cmd_analyze(const std::string& what, const std::string& records_path,
                const std::string& data_path,
                const std::vector<std::string>& model_records_paths,
                const std::string& single_records_path,
                const std::string& out_path) {
  Dataset data = load_jsonl(data_path);
  const auto records = load_records(records_path);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write: " + out_path);
  out << std::setprecision(10);

  if (what == "logits") {
    out << "sample_id,candidate,category,value\n";
    for (const auto& row : normalized_logits(records, data)) {
      out << row.sample_id << ',' << row.candidate << ','
          << category_name(row.category) << ',' << row.value << '\n';
    }
  } else if (what == "overlap") {
    out << "sample_id,q_overlap_rel,a_overlap_rel,predicted_label,"
           "query_only\n";
    for (const auto& row :
         overlap_distribution(records, data, default_stoplist())) {
      out << row.sample_id << ',' << row.q_overlap_rel << ','
          << row.a_overlap_rel << ',' << row.predicted_label << ','
          << (row.query_only ? 1 : 0) << '\n';
    }
  } else if (what == "split") {
    if (model_records_paths.empty()) {
      throw std::runtime_error(
          "analyze --what split needs --model-records (repeatable)");
    }
    std::vector<std::vector<bool>> correctness;
    for (const auto& path : model_records_paths) {
      const auto model_records = load_records(path);
      if (model_records.size() != data.samples.size()) {
        throw std::runtime_error("model records do not match dataset: " +
                                 path);
      }
      std::vector<bool> correct(model_records.size());
      for (std::size_t i = 0; i < model_records.size(); ++i) {
        correct[i] =
            model_records[i].predicted_label == data.samples[i].label;
      }
      correctness.push_back(std::move(correct));
    }
    out << "solved_by,size,f1a,delta_f1a\n";
    for (const auto& g : solvability_split(correctness, data, records)) {
      out << g.solved_by << ',' << g.sample_indices.size() << ',' << g.f1a
          << ',' << g.delta_f1a << '\n';
    }
  } else if (what == "stability") {
    if (single_records_path.empty()) {
      throw std::runtime_error(
          "analyze --what stability needs --single-records");
    }
    const auto single_records = load_records(single_records_path);
    const auto table = pair_stability(records, single_records, data);
    out << "joint_label,sentence,unchanged,total,fraction\n";
    const char* names[2] = {"shared", "new"};
    for (int label = 0; label < 2; ++label) {
      for (int which = 0; which < 2; ++which) {
        const auto& cell = table.cells[label][which];
        out << label << ',' << names[which] << ',' << cell.unchanged << ','
            << cell.total << ',' << cell.fraction() << '\n';
      }
    }
    out << "skipped,," << table.skipped << ",,\n";
  } else {
    throw std::runtime_error("unknown --what: " + what);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Faithful sentence-level rationale selection"};
  app.require_subcommand(1);

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "Generate a synthetic corpus (JSONL)");
  std::string gen_family = "single_evidence", gen_out;
  SynthConfig synth;
  gen->add_option("--family", gen_family,
                  "single_evidence | two_hop | discussion");
  gen->add_option("--seed", synth.seed, "generator seed");
  gen->add_option("--out", gen_out, "output JSONL path")->required();
  gen->add_option("--num-samples", synth.num_samples);
  gen->add_option("--vocab-size", synth.vocab_size);
  gen->add_option("--sentences-per-doc", synth.sentences_per_doc);
  gen->add_option("--query-len", synth.query_len);
  gen->add_option("--sentence-len", synth.sentence_len);
  gen->add_option("--num-labels", synth.num_labels);

  // import-eraser
  auto* imp = app.add_subcommand("import-eraser",
                                 "Convert an ERASER split to native JSONL");
  std::string imp_docs, imp_annotations, imp_labels, imp_out;
  imp->add_option("--docs", imp_docs, "directory of per-docid text files")
      ->required();
  imp->add_option("--annotations", imp_annotations, "JSONL annotations")
      ->required();
  imp->add_option("--labels", imp_labels,
                  "label map, e.g. 'False=0,True=1'")
      ->required();
  imp->add_option("--out", imp_out)->required();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  std::string stats_data;
  stats_cmd->add_option("--data", stats_data)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the selector model");
  std::string tr_config, tr_train, tr_val, tr_out;
  std::vector<std::string> tr_set;
  train_cmd->add_option("--config", tr_config, "key=value config file");
  train_cmd->add_option("--set", tr_set, "config override key=value");
  train_cmd->add_option("--train", tr_train)->required();
  train_cmd->add_option("--val", tr_val)->required();
  train_cmd->add_option("--out", tr_out, "output run directory")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ev_ckpt, ev_data, ev_out, ev_csv;
  eval_cmd->add_option("--checkpoint", ev_ckpt)->required();
  eval_cmd->add_option("--data", ev_data)->required();
  eval_cmd->add_option("--out", ev_out, "report JSON path")->required();
  eval_cmd->add_option("--csv", ev_csv, "per-sample CSV path (optional)");

  // predict
  auto* pred_cmd =
      app.add_subcommand("predict", "Write prediction records (JSONL)");
  std::string pr_ckpt, pr_data, pr_out;
  pred_cmd->add_option("--checkpoint", pr_ckpt)->required();
  pred_cmd->add_option("--data", pr_data)->required();
  pred_cmd->add_option("--out", pr_out)->required();

  // baseline
  auto* base_cmd =
      app.add_subcommand("baseline", "Lexical-overlap LR baseline");
  std::string bl_train, bl_val, bl_test, bl_out;
  base_cmd->add_option("--train", bl_train)->required();
  base_cmd->add_option("--val", bl_val)->required();
  base_cmd->add_option("--test", bl_test);
  base_cmd->add_option("--out", bl_out)->required();

  // learning-curve
  auto* lc_cmd = app.add_subcommand("learning-curve",
                                    "Train/eval over data fractions x seeds");
  std::string lc_config, lc_train, lc_val, lc_fracs = "1.0", lc_seeds = "1",
              lc_out;
  std::vector<std::string> lc_set;
  lc_cmd->add_option("--config", lc_config);
  lc_cmd->add_option("--set", lc_set);
  lc_cmd->add_option("--train", lc_train)->required();
  lc_cmd->add_option("--val", lc_val)->required();
  lc_cmd->add_option("--fractions", lc_fracs, "comma list, e.g. 0.1,0.5,1");
  lc_cmd->add_option("--seeds", lc_seeds, "comma list, e.g. 1,2,3");
  lc_cmd->add_option("--out", lc_out)->required();

  // analyze
  auto* an_cmd = app.add_subcommand("analyze", "Diagnostic CSV exports");
  std::string an_records, an_data, an_what, an_single, an_out;
  std::vector<std::string> an_model_records;
  an_cmd->add_option("--records", an_records)->required();
  an_cmd->add_option("--data", an_data)->required();
  an_cmd->add_option("--what", an_what, "logits | overlap | split | stability")
      ->required();
  an_cmd->add_option("--model-records", an_model_records,
                     "reference model records (repeatable, for split)");
  an_cmd->add_option("--single-records", an_single,
                     "single-sentence model records (for stability)");
  an_cmd->add_option("--out", an_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n'
              << app.help() << '\n';
    return 2;
  }

  try {
    if (*gen) {
      synth.family = parse_family(gen_family);
      save_jsonl(generate(synth), gen_out);
      std::cout << "wrote " << synth.num_samples << " samples to " << gen_out
                << '\n';
    } else if (*imp) {
      std::map<std::string, int> label_map;
      std::stringstream ss(imp_labels);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
          throw std::runtime_error("--labels expects name=id pairs");
        }
        label_map[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
      }
      Dataset data = import_eraser(imp_docs, imp_annotations, label_map);
      save_jsonl(data, imp_out);
      std::cout << "imported " << data.samples.size() << " samples\n";
    } else if (*stats_cmd) {
      const auto stats = corpus_stats(load_jsonl(stats_data));
      std::cout << "samples: " << stats.num_samples << '\n'
                << "annotated: " << stats.num_annotated << '\n'
                << "rationales/sample: " << stats.rationales_per_sample
                << '\n'
                << "min reasoning-hops histogram:\n";
      for (const auto& [hops, count] : stats.min_hops_histogram) {
        std::cout << "  " << hops << ": " << count << '\n';
      }
    } else if (*train_cmd) {
      return cmd_train(tr_config, tr_set, tr_train, tr_val, tr_out);
    } else if (*eval_cmd) {
      const auto ckpt = load_checkpoint(ev_ckpt);
      Dataset data = bind_dataset(ckpt, ev_data);
      const auto records =
          predict_dataset(ckpt.params, data, ckpt.h, ckpt.tau);
      const auto report = evaluate(records, data);
      std::ofstream out(ev_out);
      if (!out) throw std::runtime_error("cannot write report: " + ev_out);
      out << report_json(report).dump(2) << '\n';
      if (!ev_csv.empty()) write_per_sample_csv(records, data, ev_csv);
      std::cout << "f1a=" << report.f1a << " acc=" << report.accuracy
                << " rationale_f1=" << report.rationale_f1 << '\n';
    } else if (*pred_cmd) {
      const auto ckpt = load_checkpoint(pr_ckpt);
      Dataset data = bind_dataset(ckpt, pr_data);
      save_records(predict_dataset(ckpt.params, data, ckpt.h, ckpt.tau),
                   pr_out);
    } else if (*base_cmd) {
      Dataset btrain = load_jsonl(bl_train);
      Dataset bval = load_jsonl(bl_val);
      const auto& stoplist = default_stoplist();
      const auto best =
          grid_search(btrain, bval, BaselineGrid::defaults(), stoplist);
      json out_json;
      out_json["w_q"] = best.w_q;
      out_json["w_a"] = best.w_a;
      out_json["mode"] =
          best.mode == OverlapMode::kAbsolute ? "absolute" : "relative";
      out_json["lr"] = {{"w_q_feat", best.model.w_q_feat},
                        {"w_a_feat", best.model.w_a_feat},
                        {"bias", best.model.bias}};
      const auto val_metrics = evaluate_baseline(bval, best, stoplist);
      out_json["val"] = {{"f1a", val_metrics.f1a},
                         {"accuracy", val_metrics.accuracy}};
      if (!bl_test.empty()) {
        Dataset btest = load_jsonl(bl_test);
        const auto test_metrics = evaluate_baseline(btest, best, stoplist);
        out_json["test"] = {{"f1a", test_metrics.f1a},
                            {"accuracy", test_metrics.accuracy}};
      }
      std::ofstream out(bl_out);
      if (!out) throw std::runtime_error("cannot write report: " + bl_out);
      out << out_json.dump(2) << '\n';
      std::cout << "baseline: mode="
                << (best.mode == OverlapMode::kAbsolute ? "absolute"
                                                        : "relative")
                << " w_q=" << best.w_q << " w_a=" << best.w_a
                << " val_f1a=" << best.val_f1a << '\n';
    } else if (*lc_cmd) {
      return cmd_learning_curve(lc_config, lc_set, lc_train, lc_val, lc_fracs,
                                lc_seeds, lc_out);
    } else if (*an_cmd) {
      return cmd_analyze(an_what, an_records, an_data, an_model_records,
                         an_single, an_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
