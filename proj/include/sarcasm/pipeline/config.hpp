#pragma once

// Pipeline configuration: a flat key-value file with [sections]. Keys are
// unique across sections, so each one can be overridden by a command-line
// flag of the same name.
//
//   [paths]
//   dataset = data/riloff.jsonl
//   out = runs/riloff
//   [run]
//   seed = 7

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sarcasm/common/error.hpp"
#include "sarcasm/common/hash.hpp"
#include "sarcasm/embed/method.hpp"
#include "sarcasm/models/classifier.hpp"
#include "sarcasm/models/trainer.hpp"
#include "sarcasm/pipeline/experiment.hpp"

namespace sarcasm::pipeline {

struct ConfigKey {
  const char* section;
  const char* name;
  const char* fallback;
  const char* help;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"paths", "dataset", "", "labeled dataset JSONL"},
      {"paths", "histories", "", "history JSONL (optional)"},
      {"paths", "word_vectors", "random", "GloVe-format text file, or 'random'"},
      {"paths", "out", "out", "output directory"},
      {"paths", "manifest", "", "split manifest (default <out>/split_manifest.jsonl)"},
      {"paths", "embeddings", "", "embedding store (default <out>/embeddings_<method>.txt)"},
      {"paths", "results", "", "comma-separated results CSVs for 'table' (default <out>/results_*.csv)"},
      {"run", "seed", "1", "base seed"},
      {"run", "method", "wcascade", "embedding method: cascade, wcascade, ed, summary"},
      {"run", "model", "siarn", "model: siarn, ex-<method>, in-<method>"},
      {"run", "workers", "1", "threads for embedding inference"},
      {"run", "tag_set", "sarcasm,sarcastic,satire,irony", "comma-separated marker hashtags"},
      {"run", "fixture", "table", "synthetic corpus for 'synth': table, planted, mixed, toy"},
      {"run", "min_words", "3", "drop tweets with fewer words"},
      {"split", "n_buckets", "10", "user-stratified buckets"},
      {"split", "valid_bucket", "8", "bucket used for validation"},
      {"split", "test_bucket", "9", "bucket used for testing"},
      {"experiment", "word_dim", "100", "word vector dimension"},
      {"experiment", "epochs", "30", "classifier epochs"},
      {"experiment", "learning_rate", "0.001", "RMSProp learning rate"},
      {"experiment", "batch_size", "16", "mini-batch size"},
      {"experiment", "embed_dim", "100", "user embedding dimension d_e"},
      {"experiment", "composition_dim", "100", "SIARN recurrent size d_c"},
      {"experiment", "rms_decay", "0.9", "RMSProp decay"},
      {"experiment", "rms_epsilon", "1e-8", "RMSProp epsilon"},
      {"embedding", "pv_epochs", "20", "paragraph vector epochs"},
      {"embedding", "pv_infer_epochs", "50", "paragraph vector inference epochs"},
      {"embedding", "personality_epochs", "50", "personality net epochs"},
      {"embedding", "fusion_epsilon", "1e-3", "CCA regularizer"},
      {"embedding", "seq2seq_hidden", "50", "encoder size per direction"},
      {"embedding", "seq2seq_epochs", "15", "encoder-decoder epochs"},
      {"embedding", "seq2seq_learning_rate", "0.005", "encoder-decoder learning rate"},
  };
  return keys;
}

inline const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

class PipelineConfig {
 public:
  PipelineConfig() {
    for (const auto& k : config_keys()) values_[k.name] = k.fallback;
  }

  // Reads `key = value` lines; '#' or ';' starts a comment line. A key must
  // appear in the section it belongs to.
  static PipelineConfig from_stream(std::istream& in, const std::string& origin = "config") {
    PipelineConfig config;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string text = trim(line);
      if (text.empty() || text[0] == '#' || text[0] == ';') continue;
      if (text.front() == '[') {
        if (text.back() != ']') throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad section header");
        section = trim(text.substr(1, text.size() - 2));
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
      const std::string key = trim(text.substr(0, eq));
      const ConfigKey* known = find_key(key);
      if (!known) throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
      if (section != known->section) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": key '" + key + "' belongs in [" +
                          known->section + "]");
      }
      config.values_[key] = trim(text.substr(eq + 1));
    }
    return config;
  }

  static PipelineConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return from_stream(in, path);
  }

  void set(const std::string& key, const std::string& value) {
    if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }

  std::string require(const std::string& key) const {
    const auto& v = get(key);
    if (v.empty()) throw ConfigError("config key '" + key + "' is required");
    return v;
  }

  std::int64_t get_int(const std::string& key) const {
    const auto& v = get(key);
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
    }
    return out;
  }

  double get_double(const std::string& key) const {
    const auto& v = get(key);
    std::istringstream in(v);
    double out = 0.0;
    if (!(in >> out) || !in.eof()) throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
    return out;
  }

  std::uint64_t seed() const {
    const auto s = get_int("seed");
    if (s < 0) throw ConfigError("seed must be >= 0");
    return static_cast<std::uint64_t>(s);
  }

  // Canonical `key=value` lines in key order; the config hash covers these.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  std::string hash() const { return Fingerprint().add(canonical()).hex(); }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  TagSet tag_set() const {
    const auto items = list("tag_set");
    if (items.empty()) throw ConfigError("tag_set must not be empty");
    return normalize_tag_set(TagSet(items.begin(), items.end()));
  }

  models::ExperimentConfig experiment() const {
    models::ExperimentConfig c;
    c.word_dim = static_cast<int>(get_int("word_dim"));
    c.epochs = static_cast<int>(get_int("epochs"));
    c.learning_rate = get_double("learning_rate");
    c.batch_size = static_cast<int>(get_int("batch_size"));
    c.seed = seed();
    c.embed_dim = static_cast<int>(get_int("embed_dim"));
    c.composition_dim = static_cast<int>(get_int("composition_dim"));
    c.rms_decay = get_double("rms_decay");
    c.rms_epsilon = get_double("rms_epsilon");
    c.validate();
    return c;
  }

  EmbedConfig embedding() const {
    EmbedConfig c;
    c.set_dim_and_seed(static_cast<int>(get_int("embed_dim")), seed());
    c.cascade.paragraph_vectors.epochs = static_cast<int>(get_int("pv_epochs"));
    c.cascade.paragraph_vectors.infer_epochs = static_cast<int>(get_int("pv_infer_epochs"));
    c.cascade.personality.epochs = static_cast<int>(get_int("personality_epochs"));
    c.cascade.fusion_epsilon = get_double("fusion_epsilon");
    c.seq2seq.hidden = static_cast<int>(get_int("seq2seq_hidden"));
    c.seq2seq.epochs = static_cast<int>(get_int("seq2seq_epochs"));
    c.seq2seq.learning_rate = get_double("seq2seq_learning_rate");
    c.workers = static_cast<int>(get_int("workers"));
    if (c.cascade.fusion_epsilon <= 0) throw ConfigError("fusion_epsilon must be > 0");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    return c;
  }

  SplitSpec split_spec() const {
    const int n = static_cast<int>(get_int("n_buckets"));
    SplitSpec spec = SplitSpec::standard(n, static_cast<int>(get_int("valid_bucket")),
                                         static_cast<int>(get_int("test_bucket")));
    spec.validate(n);
    return spec;
  }

  embed::EmbeddingMethod method() const { return embed::parse_method(get("method")); }
  models::ModelSpec model() const { return models::ModelSpec::parse(get("model")); }

 private:
  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace sarcasm::pipeline
