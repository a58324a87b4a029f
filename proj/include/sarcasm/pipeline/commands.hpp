#pragma once

// One function per pipeline stage. Each reads what the config points at,
// writes its primary outputs under `out`, and leaves a sidecar JSON with the
// config hash, seed and input fingerprints. Errors are thrown; the CLI maps
// them to exit codes.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sarcasm/corpus.hpp"
#include "sarcasm/eval.hpp"
#include "sarcasm/pipeline/config.hpp"
#include "sarcasm/pipeline/experiment.hpp"
#include "sarcasm/split.hpp"
#include "sarcasm/synthetic.hpp"

namespace sarcasm::pipeline {

namespace fs = std::filesystem;

namespace detail {

inline fs::path out_dir(const PipelineConfig& config) {
  fs::path dir = config.require("out");
  fs::create_directories(dir);
  return dir;
}

inline std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

inline void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw ConfigError(what + " file not found: " + path);
}

// Lower-case file-name form of a model or method name.
inline std::string slug(const std::string& name) { return to_lower_ascii(name); }

class Sidecar {
 public:
  Sidecar(std::string command, const PipelineConfig& config) {
    json_ = {{"command", std::move(command)}, {"config_hash", config.hash()}, {"seed", config.seed()},
             {"inputs", nlohmann::json::object()}, {"outputs", nlohmann::json::array()}};
  }

  void input(const std::string& role, const std::string& path) {
    json_["inputs"][role] = {{"path", path}, {"fingerprint", fingerprint_file(path)}};
  }

  void output(const fs::path& path) { json_["outputs"].push_back(path.filename().string()); }

  nlohmann::json& extra() { return json_; }

  void write(const fs::path& path) const { write_json(path, json_); }

 private:
  nlohmann::json json_;
};

struct Inputs {
  LabeledDataset dataset;
  HistoryStore histories;
};

inline Inputs load_inputs(const PipelineConfig& config, Sidecar& sidecar, bool with_histories) {
  Inputs in;
  const std::string dataset_path = config.require("dataset");
  require_file(dataset_path, "dataset");
  in.dataset = load_dataset(dataset_path);
  sidecar.input("dataset", dataset_path);
  const std::string& history_path = config.get("histories");
  if (with_histories && !history_path.empty()) {
    require_file(history_path, "histories");
    in.histories = load_histories(history_path, in.dataset);
    sidecar.input("histories", history_path);
  }
  return in;
}

inline std::string manifest_path(const PipelineConfig& config) {
  const auto& explicit_path = config.get("manifest");
  return explicit_path.empty() ? (fs::path(config.require("out")) / "split_manifest.jsonl").string() : explicit_path;
}

inline DatasetSplits load_splits(const PipelineConfig& config, const LabeledDataset& dataset, Sidecar& sidecar) {
  const std::string path = manifest_path(config);
  require_file(path, "split manifest (run 'split' first)");
  auto in = sarcasm::detail::open_input(path);
  const SplitManifest manifest = read_manifest(in);
  sidecar.input("manifest", path);
  return apply_manifest(dataset, manifest);
}

inline std::string embeddings_path(const PipelineConfig& config, embed::EmbeddingMethod method) {
  const auto& explicit_path = config.get("embeddings");
  if (!explicit_path.empty()) return explicit_path;
  return (fs::path(config.require("out")) / ("embeddings_" + std::string(embed::flag_name(method)) + ".txt")).string();
}

inline WordEmbeddingMatrix word_vectors(const PipelineConfig& config, const Vocabulary& vocab, Sidecar& sidecar) {
  const std::string& path = config.get("word_vectors");
  if (path != "random") {
    require_file(path, "word vector");
    sidecar.input("word_vectors", path);
  }
  return load_word_vectors(path, vocab, static_cast<int>(config.get_int("word_dim")), mix_seed(config.seed(), 7));
}

inline PreparedCorpus prepare_from(const PipelineConfig& config, const DatasetSplits& splits,
                                   const HistoryStore& histories) {
  const auto min_words = config.get_int("min_words");
  if (min_words < 1) throw ConfigError("min_words must be >= 1");
  return prepare(splits, histories, config.tag_set(), static_cast<std::size_t>(min_words));
}

inline nlohmann::json label_counts(const LabeledDataset& d) {
  return {{"tweets", d.size()},
          {"sarcastic", d.count(Label::sarcastic)},
          {"non_sarcastic", d.count(Label::non_sarcastic)},
          {"users", d.users().size()}};
}

}  // namespace detail

// Loads and validates the dataset (and histories); reports Table-1 counts.
inline nlohmann::json cmd_ingest(const PipelineConfig& config) {
  detail::Sidecar sidecar("ingest", config);
  const auto in = detail::load_inputs(config, sidecar, true);
  std::set<std::string> history_ids;
  std::size_t with_history = 0;
  for (const auto& [anchor, h] : in.histories) {
    with_history += !h.tweets.empty();
    for (const auto& t : h.tweets) history_ids.insert(t.id);
  }
  nlohmann::json report = {{"dataset", in.dataset.name}};
  report.update(detail::label_counts(in.dataset));
  report["anchors_with_history"] = with_history;
  report["history_tweets"] = history_ids.size();

  const auto dir = detail::out_dir(config);
  detail::write_json(dir / "ingest_report.json", report);
  sidecar.output(dir / "ingest_report.json");
  sidecar.write(dir / "ingest.sidecar.json");
  return report;
}

// User-stratified buckets -> split manifest.
inline nlohmann::json cmd_split(const PipelineConfig& config) {
  detail::Sidecar sidecar("split", config);
  const auto in = detail::load_inputs(config, sidecar, false);
  const SplitSpec spec = config.split_spec();
  const int n_buckets = static_cast<int>(config.get_int("n_buckets"));
  const auto assignment = stratify_by_user(in.dataset, n_buckets, config.seed());
  const auto splits = make_splits(in.dataset, assignment, spec);
  const auto manifest =
      make_manifest(in.dataset, splits, spec, n_buckets, config.seed(), fingerprint_file(config.require("dataset")));

  const auto dir = detail::out_dir(config);
  const fs::path path = detail::manifest_path(config);
  {
    auto out = detail::open_output(path);
    write_manifest(out, manifest);
  }
  nlohmann::json report = {{"dataset", in.dataset.name},
                           {"train", detail::label_counts(splits.train)},
                           {"valid", detail::label_counts(splits.valid)},
                           {"test", detail::label_counts(splits.test)}};
  detail::write_json(dir / "split_report.json", report);
  sidecar.output(path);
  sidecar.output(dir / "split_report.json");
  sidecar.write(dir / "split.sidecar.json");
  return report;
}

// Fits the configured method on the training side and embeds every labeled
// tweet's history.
inline nlohmann::json cmd_embed(const PipelineConfig& config) {
  const auto method = config.method();
  detail::Sidecar sidecar("embed", config);
  const auto in = detail::load_inputs(config, sidecar, true);
  const auto splits = detail::load_splits(config, in.dataset, sidecar);
  const auto corpus = detail::prepare_from(config, splits, in.histories);
  const auto words = detail::word_vectors(config, corpus.vocab, sidecar);
  const EmbedConfig embed_config = config.embedding();

  auto models = fit_embedding_models(method, corpus, words, embed_config);
  const auto store = build_embeddings(models, corpus, embed_config.workers);

  const auto dir = detail::out_dir(config);
  const fs::path path = detail::embeddings_path(config, method);
  {
    auto out = detail::open_output(path);
    embed::write_embeddings(out, store);
  }
  const fs::path checkpoint = dir / ("embedding_model_" + std::string(embed::flag_name(method)) + ".json");
  detail::write_json(checkpoint, models.to_json());

  std::size_t empty = 0;
  std::size_t zero = 0;
  for (const auto& e : store.rows) {
    empty += e.empty_history;
    zero += e.zero_norm;
  }
  nlohmann::json report = {{"method", embed::display_name(method)},
                           {"d_e", store.dim},
                           {"count", store.rows.size()},
                           {"empty_history", empty},
                           {"zero_norm", zero}};
  sidecar.output(path);
  sidecar.output(checkpoint);
  sidecar.extra()["checkpoint"] = {
      {"method", embed::display_name(method)},
      {"dims", {{"d_e", store.dim}, {"word_dim", words.cols()}, {"vocab", words.rows()}}},
      {"seed", config.seed()},
      {"epochs",
       {{"paragraph_vectors", embed_config.cascade.paragraph_vectors.epochs},
        {"personality", embed_config.cascade.personality.epochs},
        {"seq2seq", embed_config.seq2seq.epochs}}},
      {"corpus_fingerprint", sidecar.extra()["inputs"]["dataset"]["fingerprint"]}};
  sidecar.extra()["report"] = report;
  sidecar.write(dir / ("embed_" + std::string(embed::flag_name(method)) + ".sidecar.json"));
  return report;
}

// Trains the configured model, scores the test split and writes the
// checkpoint, predictions and a results row.
inline nlohmann::json cmd_train_eval(const PipelineConfig& config) {
  const auto spec = config.model();
  const auto experiment = config.experiment();
  detail::Sidecar sidecar("train-eval", config);
  const auto in = detail::load_inputs(config, sidecar, true);
  const auto splits = detail::load_splits(config, in.dataset, sidecar);
  const auto corpus = detail::prepare_from(config, splits, in.histories);
  const auto words = detail::word_vectors(config, corpus.vocab, sidecar);

  std::optional<embed::EmbeddingStore> store;
  if (spec.uses_embedding()) {
    const std::string path = detail::embeddings_path(config, spec.method);
    detail::require_file(path, "embedding store (run 'embed' first)");
    std::ifstream file(path);
    store = embed::read_embeddings(file);
    if (store->method != spec.method) {
      throw ConfigError("embedding store " + path + " holds " + embed::display_name(store->method) +
                        " vectors but the model needs " + embed::display_name(spec.method));
    }
    if (store->dim != experiment.embed_dim) {
      throw ConfigError("embedding store has d_e " + std::to_string(store->dim) + ", config embed_dim is " +
                        std::to_string(experiment.embed_dim));
    }
    sidecar.input("embeddings", path);
  }
  const embed::EmbeddingStore* store_ptr = store ? &*store : nullptr;
  const auto train_examples = make_examples(corpus.train, store_ptr);
  const auto valid_examples = make_examples(corpus.valid, store_ptr);
  const auto test_examples = make_examples(corpus.test, store_ptr);

  auto run = models::train(spec, train_examples, valid_examples, experiment, words);
  const auto evaluation = evaluate(run.model, test_examples, in.dataset.name);

  const auto dir = detail::out_dir(config);
  const std::string name = detail::slug(spec.name());
  const fs::path checkpoint = dir / ("model_" + name + ".json");
  detail::write_json(checkpoint, run.model.to_json());
  const fs::path predictions = dir / ("predictions_" + name + ".jsonl");
  {
    auto out = detail::open_output(predictions);
    for (const auto& p : evaluation.predictions) {
      nlohmann::json row = {{"tweet_id", p.tweet_id}};
      if (p.prediction) {
        row["p_sarcastic"] = p.prediction->p_sarcastic();
        row["label"] = to_string(p.prediction->label);
      } else {
        row["error"] = p.error;
      }
      out << row.dump() << '\n';
    }
  }
  const fs::path results = dir / ("results_" + name + ".csv");
  {
    auto out = detail::open_output(results);
    write_results_csv(out, {evaluation.result});
  }
  sidecar.output(checkpoint);
  sidecar.output(predictions);
  sidecar.output(results);
  const auto training = models::training_sidecar(run, experiment);
  for (const auto& [k, v] : training.items()) sidecar.extra()[k] = v;
  sidecar.extra()["test"] = {{"f1", evaluation.result.f1},
                             {"tp", evaluation.result.tp},
                             {"fp", evaluation.result.fp},
                             {"fn", evaluation.result.fn},
                             {"tn", evaluation.result.tn}};
  sidecar.write(dir / ("train_" + name + ".sidecar.json"));

  return {{"model", spec.name()},
          {"dataset", in.dataset.name},
          {"f1", evaluation.result.f1},
          {"selected_epoch", run.selected_epoch},
          {"final_train_f1", run.metrics.empty() ? 0.0 : run.metrics.back().train_f1}};
}

// Tag/label disagreement table and the distantly relabeled dataset.
inline nlohmann::json cmd_analyze(const PipelineConfig& config) {
  detail::Sidecar sidecar("analyze", config);
  const auto in = detail::load_inputs(config, sidecar, false);
  const TagSet tags = config.tag_set();
  const auto table = disagreement_table(in.dataset, tags);
  const auto relabeled = relabel_distant(in.dataset, tags);

  const auto dir = detail::out_dir(config);
  nlohmann::json report = {{"dataset", in.dataset.name},
                           {"disagreement", to_json(table)},
                           {"relabeled_dataset", relabeled.name},
                           {"relabeled", detail::label_counts(relabeled)}};
  detail::write_json(dir / "disagreement.json", report);
  const fs::path relabeled_path = dir / (in.dataset.name + "_relabeled.jsonl");
  {
    auto out = detail::open_output(relabeled_path);
    write_dataset(out, relabeled);
  }
  sidecar.output(dir / "disagreement.json");
  sidecar.output(relabeled_path);
  sidecar.write(dir / "analyze.sidecar.json");
  return report;
}

// Collects results rows into the grouped table.
inline std::string cmd_table(const PipelineConfig& config) {
  detail::Sidecar sidecar("table", config);
  const auto dir = detail::out_dir(config);
  std::vector<std::string> files = config.list("results");
  if (files.empty()) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto file = entry.path().filename().string();
      if (file.rfind("results_", 0) == 0 && entry.path().extension() == ".csv") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
  }
  std::vector<RunResult> results;
  for (const auto& f : files) {
    detail::require_file(f, "results");
    std::ifstream in(f);
    for (auto& r : read_results_csv(in)) results.push_back(std::move(r));
    sidecar.input(fs::path(f).filename().string(), f);
  }
  const auto table = results_table(results);
  {
    auto out = detail::open_output(dir / "results_table.csv");
    out << table.csv;
  }
  {
    auto out = detail::open_output(dir / "results_table.txt");
    out << table.text;
  }
  sidecar.output(dir / "results_table.csv");
  sidecar.output(dir / "results_table.txt");
  sidecar.write(dir / "table.sidecar.json");
  return table.text;
}

// Writes a synthetic corpus (dataset and histories) into `out`.
inline nlohmann::json cmd_synth(const PipelineConfig& config) {
  const std::string fixture = config.get("fixture");
  const auto dir = detail::out_dir(config);
  synthetic::Corpus corpus;
  nlohmann::json report = {{"fixture", fixture}};
  if (fixture == "table") {
    auto t = synthetic::table_fixture();
    corpus = std::move(t.corpus);
    report["split_seed"] = t.split_seed;
  } else if (fixture == "planted") {
    corpus = synthetic::planted_corpus(config.seed());
  } else if (fixture == "mixed") {
    corpus = synthetic::mixed_corpus(config.seed());
  } else if (fixture == "toy") {
    corpus.dataset = synthetic::toy_corpus(config.seed());
  } else {
    throw ConfigError("unknown fixture '" + fixture + "' (expected table, planted, mixed or toy)");
  }
  const fs::path dataset_path = dir / (corpus.dataset.name + ".jsonl");
  {
    auto out = detail::open_output(dataset_path);
    write_dataset(out, corpus.dataset);
  }
  report["dataset"] = dataset_path.string();
  if (!corpus.histories.empty()) {
    const fs::path history_path = dir / (corpus.dataset.name + "_histories.jsonl");
    auto out = detail::open_output(history_path);
    write_histories(out, corpus.histories);
    report["histories"] = history_path.string();
  }
  report.update(detail::label_counts(corpus.dataset));
  detail::write_json(dir / "synth_report.json", report);
  return report;
}

}  // namespace sarcasm::pipeline
