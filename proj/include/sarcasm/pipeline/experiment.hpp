#pragma once

// End-to-end steps shared by the CLI and the experiments: preprocessing a
// split dataset with its histories, building user embeddings, and training
// and scoring a model on the result.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sarcasm/corpus.hpp"
#include "sarcasm/embed/user_embedding.hpp"
#include "sarcasm/eval.hpp"
#include "sarcasm/models/trainer.hpp"
#include "sarcasm/preprocess.hpp"
#include "sarcasm/split.hpp"
#include "sarcasm/synthetic.hpp"

namespace sarcasm::pipeline {

struct PreparedTweet {
  Tweet tweet;
  Tokens tokens;
  EncodedTokens indices;
};

struct PreparedHistoryTweet {
  Tokens tokens;
  EncodedTokens indices;
};

// Tag-stripped, tokenized and encoded data. Labeled tweets with fewer than
// three words are dropped; so are such history tweets.
struct PreparedCorpus {
  Vocabulary vocab;
  std::vector<PreparedTweet> train;
  std::vector<PreparedTweet> valid;
  std::vector<PreparedTweet> test;
  std::map<std::string, PreparedHistoryTweet> history_tweets;     // by history tweet id
  std::map<std::string, std::vector<std::string>> anchor_history;  // anchor id -> history ids, oldest first
  std::size_t dropped_short = 0;

  std::vector<const PreparedTweet*> all() const {
    std::vector<const PreparedTweet*> out;
    for (const auto* part : {&train, &valid, &test}) {
      for (const auto& t : *part) out.push_back(&t);
    }
    return out;
  }

  embed::AnchorHistory history(const PreparedTweet& anchor) const {
    embed::AnchorHistory h{anchor.tweet.user_id, anchor.tweet.id, {}};
    const auto it = anchor_history.find(anchor.tweet.id);
    if (it == anchor_history.end()) return h;
    for (const auto& id : it->second) h.tweets.push_back(history_tweets.at(id).indices);
    return h;
  }

  std::vector<embed::AnchorHistory> histories(const std::vector<PreparedTweet>& anchors) const {
    std::vector<embed::AnchorHistory> out;
    out.reserve(anchors.size());
    for (const auto& a : anchors) out.push_back(history(a));
    return out;
  }

  // Distinct history tweet ids of the training anchors, in first-seen order.
  std::vector<std::string> training_history_ids() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& a : train) {
      const auto it = anchor_history.find(a.tweet.id);
      if (it == anchor_history.end()) continue;
      for (const auto& id : it->second) {
        if (seen.insert(id).second) out.push_back(id);
      }
    }
    return out;
  }
};

inline Tokens clean_tokens(const std::string& text, const TagSet& tags) {
  return strip_sarcasm_tags(tokenize(text), tags);
}

// The vocabulary is built from the training tweets and every history tweet
// (histories carry no labels).
inline PreparedCorpus prepare(const DatasetSplits& splits, const HistoryStore& histories,
                              const TagSet& tags = default_tag_set(), std::size_t min_words = 3) {
  PreparedCorpus out;
  const TagSet normalized = normalize_tag_set(tags);
  auto keep = [&](const Tokens& tokens) { return word_count(tokens) >= min_words; };

  std::vector<Tokens> vocab_corpus;
  auto load_part = [&](const LabeledDataset& part, std::vector<PreparedTweet>& into, bool for_vocab) {
    for (const auto& tweet : part.tweets) {
      Tokens tokens = clean_tokens(tweet.text, normalized);
      if (!keep(tokens)) {
        ++out.dropped_short;
        continue;
      }
      if (for_vocab) vocab_corpus.push_back(tokens);
      into.push_back({tweet, std::move(tokens), {}});
    }
  };
  load_part(splits.train, out.train, true);
  load_part(splits.valid, out.valid, false);
  load_part(splits.test, out.test, false);

  for (const auto& [anchor, history] : histories) {
    auto& ids = out.anchor_history[anchor];
    for (const auto& tweet : history.tweets) {
      auto it = out.history_tweets.find(tweet.id);
      if (it == out.history_tweets.end()) {
        Tokens tokens = clean_tokens(tweet.text, normalized);
        if (!keep(tokens)) continue;
        vocab_corpus.push_back(tokens);
        it = out.history_tweets.emplace(tweet.id, PreparedHistoryTweet{std::move(tokens), {}}).first;
      }
      ids.push_back(tweet.id);
    }
  }

  out.vocab = Vocabulary::build(vocab_corpus);
  for (auto* part : {&out.train, &out.valid, &out.test}) {
    for (auto& t : *part) t.indices = encode(t.tokens, out.vocab);
  }
  for (auto& [id, h] : out.history_tweets) h.indices = encode(h.tokens, out.vocab);
  return out;
}

struct EmbedConfig {
  embed::CascadeConfig cascade;
  embed::Seq2SeqConfig seq2seq;
  int workers = 1;
  std::uint64_t seed = 1;

  // Keeps every sub-model's output at d_e and derives sub-model seeds.
  void set_dim_and_seed(int d_e, std::uint64_t base_seed) {
    seed = base_seed;
    cascade.embed_dim = d_e;
    cascade.paragraph_vectors.dim = d_e;
    cascade.personality.hidden = d_e;
    seq2seq.embed_dim = d_e;
    cascade.paragraph_vectors.seed = mix_seed(base_seed, 1);
    cascade.personality.seed = mix_seed(base_seed, 2);
    seq2seq.seed = mix_seed(base_seed, 3);
  }
};

// Trained sub-models of one embedding method.
struct EmbeddingModels {
  embed::EmbeddingMethod method = embed::EmbeddingMethod::cascade;
  std::optional<embed::CascadeModels> cascade;
  std::optional<embed::SequenceEncoder> encoder;

  int dim() const { return cascade ? cascade->dim() : encoder ? encoder->dim() : 0; }

  embed::UserEmbedding embed(const embed::AnchorHistory& h) const {
    switch (method) {
      case embed::EmbeddingMethod::cascade: return embed::cascade_embed(h, *cascade);
      case embed::EmbeddingMethod::w_cascade: return embed::wcascade_embed(h, *cascade);
      case embed::EmbeddingMethod::ed: return embed::ed_embed(h, *encoder);
      case embed::EmbeddingMethod::summary: return embed::summary_embed(h, *encoder);
    }
    throw ConfigError("unknown embedding method");
  }

  nlohmann::json to_json() {
    nlohmann::json j = {{"method", embed::display_name(method)}};
    if (cascade) j["cascade"] = cascade->to_json();
    if (encoder) j["encoder"] = encoder->to_json();
    return j;
  }
};

// Fits the method's sub-models on the training side of `corpus`:
//   CASCADE    one merged document per training anchor
//   W-CASCADE  each distinct training history tweet as its own document
//   ED         autoencoder over the distinct training history tweets
//   SUMMARY    prefix summaries of the same tweets
inline EmbeddingModels fit_embedding_models(embed::EmbeddingMethod method, const PreparedCorpus& corpus,
                                            const WordEmbeddingMatrix& words, const EmbedConfig& config) {
  EmbeddingModels models;
  models.method = method;
  const auto history_ids = corpus.training_history_ids();
  std::vector<std::vector<int>> tweets;
  tweets.reserve(history_ids.size());
  for (const auto& id : history_ids) tweets.push_back(corpus.history_tweets.at(id).indices);
  if (tweets.empty()) throw DomainError("no training history tweets to fit " + std::string(embed::display_name(method)));

  switch (method) {
    case embed::EmbeddingMethod::cascade:
    case embed::EmbeddingMethod::w_cascade: {
      std::vector<embed::Document> documents;
      if (method == embed::EmbeddingMethod::cascade) {
        for (const auto& h : corpus.histories(corpus.train)) {
          if (!h.tweets.empty()) documents.push_back(embed::merge_history_document<int>(h.tweets, Vocabulary::unk));
        }
      } else {
        documents = tweets;
      }
      const auto traits = synthetic::personality_corpus(documents, mix_seed(config.seed, 4));
      models.cascade = embed::fit_cascade(documents, traits, words, config.cascade);
      break;
    }
    case embed::EmbeddingMethod::ed:
      models.encoder = embed::train_autoencoder(tweets, words, config.seq2seq);
      break;
    case embed::EmbeddingMethod::summary: {
      std::vector<embed::SequencePair> pairs;
      for (const auto& id : history_ids) {
        pairs.push_back(embed::prefix_summary_pair(corpus.history_tweets.at(id).tokens, corpus.vocab));
      }
      models.encoder = embed::train_summarizer(pairs, words, config.seq2seq);
      break;
    }
  }
  return models;
}

// Embeddings for every labeled tweet (train, valid, test order).
inline embed::EmbeddingStore build_embeddings(const EmbeddingModels& models, const PreparedCorpus& corpus,
                                              int workers = 1) {
  std::vector<embed::AnchorHistory> histories;
  for (const auto* t : corpus.all()) histories.push_back(corpus.history(*t));
  embed::EmbeddingStore store;
  store.method = models.method;
  store.dim = models.dim();
  store.rows = embed::embed_all(histories, [&](const embed::AnchorHistory& h) { return models.embed(h); }, workers);
  return store;
}

inline std::vector<models::Example> make_examples(const std::vector<PreparedTweet>& tweets,
                                                  const embed::EmbeddingStore* store) {
  std::unordered_map<std::string, const embed::UserEmbedding*> index;
  if (store) index = store->index();
  std::vector<models::Example> out;
  out.reserve(tweets.size());
  for (const auto& t : tweets) {
    models::Example ex{t.tweet.id, t.indices, std::nullopt, *t.tweet.label};
    if (const auto it = index.find(t.tweet.id); it != index.end()) ex.embedding = it->second->vector;
    out.push_back(std::move(ex));
  }
  return out;
}

struct Evaluation {
  RunResult result;
  std::vector<models::PredictionOutcome> predictions;
};

// Items without a prediction count as non-sarcastic.
inline Evaluation evaluate(const models::Classifier& model, const std::vector<models::Example>& examples,
                           const std::string& dataset_name) {
  Evaluation out;
  out.predictions = models::predict(model, examples);
  std::vector<Label> predicted;
  std::vector<Label> gold;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& p = out.predictions[i].prediction;
    predicted.push_back(p ? p->label : Label::non_sarcastic);
    gold.push_back(examples[i].label);
  }
  out.result = f1_from_labels(predicted, gold);
  out.result.dataset = dataset_name;
  out.result.model = model.spec().name();
  return out;
}

}  // namespace sarcasm::pipeline
