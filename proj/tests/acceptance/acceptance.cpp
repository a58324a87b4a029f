// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
//
//   acceptance --cli <path to sarcasm binary> [--only N]

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <unistd.h>

#include "sarcasm/sarcasm.hpp"
#include "support/scenarios.hpp"

using namespace sarcasm;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) { return format_fixed(v, digits); }

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double u1 = std::max(rng.uniform(), 1e-300);
      const double u2 = rng.uniform();
      m(i, j) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
  }
  return m;
}

// Item i (0-based) lies in partition k when the real interval
// [(k-1) n / 10, k n / 10) contains it.
std::vector<int> partition_oracle(long n) {
  std::vector<int> out;
  for (long i = 0; i < n; ++i) {
    int found = 0;
    for (int k = 1; k <= 10; ++k) {
      if (10 * i >= (k - 1) * n && 10 * i < k * n) {
        if (found != 0) return {};
        found = k;
      }
    }
    out.push_back(found);
  }
  return out;
}

Outcome temporal_weights_oracle() {
  for (long n = 1; n <= 200; ++n) {
    const auto expected = partition_oracle(n);
    std::map<int, long> counts;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (expected[i] < 1 || expected[i] > 10 || (i > 0 && expected[i] < expected[i - 1])) {
        return {false, "oracle broken at n=" + std::to_string(n)};
      }
      ++counts[expected[i]];
    }
    long sum = 0;
    for (int k = 1; k <= 10; ++k) {
      const long c = counts[k];
      if (c != n / 10 && c != (n + 9) / 10) return {false, "oracle count off at n=" + std::to_string(n)};
      sum += c;
    }
    if (sum != n) return {false, "oracle sum off at n=" + std::to_string(n)};
    if (embed::temporal_weights(n) != expected) return {false, "mismatch at n=" + std::to_string(n)};
  }
  return {true, "n = 1..200 exact"};
}

LabeledDataset random_dataset(Rng& rng) {
  // Stratification needs at least as many users as buckets.
  const std::size_t users = 10 + rng.index(51);
  const std::size_t tweets = users + rng.index(301 - users);
  LabeledDataset d;
  d.name = "random";
  for (std::size_t i = 0; i < tweets; ++i) {
    const std::size_t u = i < users ? i : rng.index(users);
    d.tweets.push_back({"t" + std::to_string(i), "u" + std::to_string(u), static_cast<std::int64_t>(i), "text",
                        rng.bernoulli(0.3) ? Label::sarcastic : Label::non_sarcastic});
  }
  rng.shuffle(d.tweets);
  return d;
}

std::string manifest_text(const LabeledDataset& d, std::uint64_t seed) {
  const auto spec = SplitSpec::standard();
  const auto splits = make_splits(d, stratify_by_user(d, 10, seed), spec);
  std::ostringstream out;
  write_manifest(out, make_manifest(d, splits, spec, 10, seed, "fp"));
  return out.str();
}

Outcome stratification_invariants() {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto d = random_dataset(rng);
    const std::uint64_t seed = rng.next();
    const auto splits = make_splits(d, stratify_by_user(d, 10, seed), SplitSpec::standard());
    std::multiset<std::string> ids;
    std::map<std::string, int> user_split;
    int part_index = 0;
    for (const auto* part : {&splits.train, &splits.valid, &splits.test}) {
      for (const auto& t : part->tweets) {
        ids.insert(t.id);
        const auto [it, inserted] = user_split.emplace(t.user_id, part_index);
        if (!inserted && it->second != part_index) return {false, "user " + t.user_id + " spans two splits"};
      }
      ++part_index;
    }
    std::multiset<std::string> expected;
    for (const auto& t : d.tweets) expected.insert(t.id);
    if (ids != expected) return {false, "splits do not partition dataset " + std::to_string(trial)};
    if (manifest_text(d, seed) != manifest_text(d, seed)) return {false, "manifest differs on rerun"};
  }
  return {true, "500 datasets"};
}

Outcome cca_fusion() {
  Rng rng(11);
  const Eigen::MatrixXd v = gaussian(rng, 500, 8);
  const Eigen::MatrixXd a = gaussian(rng, 8, 8) + 3.0 * Eigen::MatrixXd::Identity(8, 8);
  const Eigen::MatrixXd p = v * a.transpose();
  const auto dependent = embed::fit_fusion(v, p, 8, 1e-9);
  const double worst_dependent = (dependent.correlations.array() - 1.0).abs().maxCoeff();
  double worst_independent = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng trial_rng(100 + static_cast<std::uint64_t>(trial));
    const auto model = embed::fit_fusion(gaussian(trial_rng, 1000, 5), gaussian(trial_rng, 1000, 5), 5);
    worst_independent = std::max(worst_independent, model.correlations.maxCoeff());
  }
  const bool pass = worst_dependent <= 1e-6 && worst_independent < 0.2;
  return {pass, "dependent |rho-1| max " + format_double(worst_dependent, 3) + ", independent rho max " +
                    fmt(worst_independent)};
}

Outcome gradient_checks() {
  std::vector<std::pair<std::string, ts::GradCheck>> checks;
  for (std::uint64_t seed : {1, 2, 3}) {
    checks.emplace_back("pair scorer", ts::pair_scorer_gradients(seed));
    checks.emplace_back("recurrent composition", ts::lstm_gradients(seed));
    checks.emplace_back("exclusive head", ts::exclusive_head_gradients(seed));
    checks.emplace_back("inclusive head", ts::inclusive_head_gradients(seed));
  }
  double worst = 0.0;
  std::string where;
  for (const auto& [name, r] : checks) {
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      where = name + " " + r.worst;
    }
  }
  return {worst < 1e-4, "max relative error " + format_double(worst, 3) + " (" + where + ")"};
}

Outcome siarn_oracle() {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng.index(8));
    const int L = 1 + static_cast<int>(rng.index(12));
    const int vocab = 20;
    WordEmbeddingMatrix words = ts::uniform_matrix(rng, vocab, d);
    models::Siarn siarn(words, 3, rng);
    siarn.pair_weight().value = ts::uniform_matrix(rng, 1, 2 * d, 2.0);
    siarn.pair_bias().value(0, 0) = rng.uniform(-1.0, 1.0);
    std::vector<int> ids;
    Eigen::MatrixXd x(d, L);
    for (int i = 0; i < L; ++i) {
      ids.push_back(static_cast<int>(rng.index(vocab)));
      x.col(i) = words.row(ids.back()).transpose();
    }
    const auto f = siarn.features(ids);
    const auto expected = ts::reference_attended(x, siarn.pair_weight().value, siarn.pair_bias().value(0, 0));
    worst = std::max(worst, (f.head(d) - expected).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, "max |v_a - reference| " + format_double(worst, 3)};
}

struct Experiment {
  pipeline::PreparedCorpus prepared;
  WordEmbeddingMatrix words;
  models::ExperimentConfig config;
};

Experiment prepare_experiment(const synthetic::Corpus& corpus, std::uint64_t seed) {
  Experiment e;
  const auto splits = make_splits(corpus.dataset, stratify_by_user(corpus.dataset, 10, seed), SplitSpec::standard());
  e.prepared = pipeline::prepare(splits, corpus.histories, default_tag_set());
  e.config.seed = seed;
  e.words = load_word_vectors("random", e.prepared.vocab, e.config.word_dim, mix_seed(seed, 7));
  return e;
}

embed::EmbeddingStore embeddings(const Experiment& e, embed::EmbeddingMethod method) {
  pipeline::EmbedConfig embed_config;
  embed_config.set_dim_and_seed(e.config.embed_dim, e.config.seed);
  const auto models = pipeline::fit_embedding_models(method, e.prepared, e.words, embed_config);
  return pipeline::build_embeddings(models, e.prepared, 1);
}

double test_f1(const Experiment& e, const std::string& model, const embed::EmbeddingStore* store) {
  const auto spec = models::ModelSpec::parse(model);
  const auto run = models::train(spec, pipeline::make_examples(e.prepared.train, store),
                                 pipeline::make_examples(e.prepared.valid, store), e.config, e.words);
  return pipeline::evaluate(run.model, pipeline::make_examples(e.prepared.test, store), "synthetic").result.f1;
}

Outcome planted_signal() {
  double ed = 0.0;
  double wcascade = 0.0;
  std::string per_seed;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto e = prepare_experiment(synthetic::planted_corpus(seed), seed);
    const auto ed_store = embeddings(e, embed::EmbeddingMethod::ed);
    const auto wc_store = embeddings(e, embed::EmbeddingMethod::w_cascade);
    const double f_ed = test_f1(e, "ex-ed", &ed_store);
    const double f_wc = test_f1(e, "ex-wcascade", &wc_store);
    ed += f_ed / 3.0;
    wcascade += f_wc / 3.0;
    per_seed += " [" + fmt(f_ed, 3) + "/" + fmt(f_wc, 3) + "]";
  }
  return {ed >= 0.90 && wcascade >= 0.90,
          "mean F1 EX-ED " + fmt(ed) + ", EX-W-CASCADE " + fmt(wcascade) + "; per seed" + per_seed};
}

Outcome inclusive_over_exclusive() {
  double in_ed = 0.0;
  double ex_ed = 0.0;
  double siarn = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto e = prepare_experiment(synthetic::mixed_corpus(seed), seed);
    const auto store = embeddings(e, embed::EmbeddingMethod::ed);
    in_ed += test_f1(e, "in-ed", &store) / 3.0;
    ex_ed += test_f1(e, "ex-ed", &store) / 3.0;
    siarn += test_f1(e, "siarn", nullptr) / 3.0;
  }
  const bool pass = in_ed - ex_ed >= 0.03 && in_ed - siarn >= 0.03;
  return {pass, "mean F1 IN-ED " + fmt(in_ed) + ", EX-ED " + fmt(ex_ed) + ", SIARN " + fmt(siarn)};
}

Outcome siarn_overfit() {
  const auto dataset = synthetic::toy_corpus(1);
  std::vector<Tokens> tokens;
  for (const auto& t : dataset.tweets) tokens.push_back(tokenize(t.text));
  const auto vocab = Vocabulary::build(tokens);
  const auto words = load_word_vectors("random", vocab, 100, 1);
  std::vector<models::Example> examples;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    examples.push_back({dataset.tweets[i].id, encode(tokens[i], vocab), std::nullopt, *dataset.tweets[i].label});
  }
  models::ExperimentConfig config;
  config.epochs = 30;
  const auto run = models::train(models::ModelSpec::parse("siarn"), examples, {}, config, words);
  const double f1 = models::dataset_f1(run.model, examples);
  return {f1 >= 0.95, "train F1 " + fmt(f1) + " on " + std::to_string(examples.size()) + " examples"};
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("sarcasm_acceptance_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Outcome table_reproduction() {
  const auto fixture = synthetic::table_fixture();
  const auto& d = fixture.corpus.dataset;
  const auto table = disagreement_table(d, default_tag_set());
  const auto relabeled = relabel_distant(d, default_tag_set());
  const DisagreementTable expected{190, 2, 217, 292};

  TempDir dir("table");
  pipeline::PipelineConfig config;
  config.set("out", dir.path().string());
  config.set("fixture", "table");
  const auto synth = pipeline::cmd_synth(config);
  config.set("dataset", synth["dataset"].get<std::string>());
  config.set("histories", synth["histories"].get<std::string>());
  config.set("seed", std::to_string(fixture.split_seed));
  const auto ingest = pipeline::cmd_ingest(config);
  const auto split = pipeline::cmd_split(config);

  const bool pass = table == expected && relabeled.count(Label::sarcastic) == 407 && ingest["tweets"] == 701 &&
                    ingest["sarcastic"] == 192 && ingest["non_sarcastic"] == 509 && split["train"]["tweets"] == 551 &&
                    split["valid"]["tweets"] == 88 && split["test"]["tweets"] == 62;
  std::ostringstream detail;
  detail << "table (" << table.sarcastic_with_tag << ", " << table.sarcastic_without_tag << ", "
         << table.nonsarcastic_with_tag << ", " << table.nonsarcastic_without_tag << "), relabeled sarcastic "
         << relabeled.count(Label::sarcastic) << ", stats " << ingest["tweets"] << "/" << ingest["sarcastic"] << "/"
         << ingest["non_sarcastic"] << "; " << split["train"]["tweets"] << "/" << split["valid"]["tweets"] << "/"
         << split["test"]["tweets"];
  return {pass, detail.str()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    out[entry.path().filename().string()] = s.str();
  }
  return out;
}

// Byte-equal outside numbers; numbers within `tolerance`.
bool same_output(const std::string& a, const std::string& b, double tolerance) {
  if (a == b) return true;
  static const std::regex number(R"([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)");
  auto split = [](const std::string& s, std::vector<std::string>& text, std::vector<double>& values) {
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
      text.push_back(s.substr(last, static_cast<std::size_t>(it->position()) - last));
      values.push_back(std::stod(it->str()));
      last = static_cast<std::size_t>(it->position() + it->length());
    }
    text.push_back(s.substr(last));
  };
  std::vector<std::string> ta, tb;
  std::vector<double> va, vb;
  split(a, ta, va);
  split(b, tb, vb);
  if (ta != tb || va.size() != vb.size()) return false;
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (std::abs(va[i] - vb[i]) > tolerance) return false;
  }
  return true;
}

Outcome determinism(const std::string& cli) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found (pass --cli)"};
  TempDir dir("determinism");
  const std::string out = dir.path().string();
  auto run = [&](const std::string& args) {
    const std::string command = "'" + cli + "' -q " + args + " --out '" + out + "' > /dev/null";
    return std::system(command.c_str()) == 0;
  };
  if (!run("synth --fixture planted --seed 4")) return {false, "synth failed"};
  const std::string inputs =
      " --dataset '" + out + "/planted.jsonl' --histories '" + out + "/planted_histories.jsonl' --seed 4";
  const std::vector<std::string> steps = {"split" + inputs, "embed --method wcascade" + inputs,
                                          "train-eval --model ex-wcascade --epochs 10" + inputs,
                                          "train-eval --model siarn --epochs 10" + inputs};
  for (const auto& s : steps) {
    if (!run(s)) return {false, "first run failed: " + s};
  }
  const auto first = snapshot(dir.path());
  for (const auto& s : steps) {
    if (!run(s)) return {false, "second run failed: " + s};
  }
  const auto second = snapshot(dir.path());
  if (first.size() != second.size()) return {false, "output file sets differ"};
  std::size_t byte_equal = 0;
  for (const auto& [name, content] : first) {
    const auto it = second.find(name);
    if (it == second.end()) return {false, name + " missing on rerun"};
    if (!same_output(content, it->second, 1e-6)) return {false, name + " differs on rerun"};
    byte_equal += content == it->second;
  }
  return {true, std::to_string(first.size()) + " files identical (" + std::to_string(byte_equal) + " byte-equal)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) cli = argv[++i];
    else if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    else {
      std::cerr << "usage: acceptance --cli <sarcasm binary> [--only N]\n";
      return 2;
    }
  }
  log::set_quiet(true);

  struct Criterion {
    int id;
    std::string name;
    double budget_seconds;  // 0: no runtime bound
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "temporal weights oracle", 1.0, temporal_weights_oracle},
      {2, "stratification invariants", 30.0, stratification_invariants},
      {3, "CCA fusion correctness", 10.0, cca_fusion},
      {4, "gradient checks", 60.0, gradient_checks},
      {5, "SIARN attention oracle", 0.0, siarn_oracle},
      {6, "exclusive planted signal", 600.0, planted_signal},
      {7, "inclusive over exclusive", 0.0, inclusive_over_exclusive},
      {8, "SIARN overfit", 0.0, siarn_overfit},
      {9, "disagreement and Table 1 counts", 0.0, table_reproduction},
      {10, "determinism", 0.0, [&cli] { return determinism(cli); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(start);
    if (c.budget_seconds > 0 && elapsed >= c.budget_seconds) {
      outcome.pass = false;
      outcome.detail += "; over the " + fmt(c.budget_seconds, 0) + " s budget";
    }
    failures += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): "
              << outcome.detail << " [" << fmt(elapsed, 2) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
