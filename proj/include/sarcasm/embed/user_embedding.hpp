#pragma once

// User embeddings e^t built from the history h^t of a labeled tweet's author:
//   CASCADE    fuse(pv(d^t), personality(d^t)) for the merged document d^t
//   W-CASCADE  recency-weighted sum of per-tweet CASCADE vectors, normalized
//   ED         recency-weighted sum of autoencoder states, normalized
//   SUMMARY    as ED with the summarizer's encoder
// An empty history gives a zero vector flagged empty_history.

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/common/format.hpp"
#include "sarcasm/embed/fusion.hpp"
#include "sarcasm/embed/method.hpp"
#include "sarcasm/embed/paragraph_vector.hpp"
#include "sarcasm/embed/personality.hpp"
#include "sarcasm/embed/seq2seq.hpp"
#include "sarcasm/embed/temporal.hpp"

namespace sarcasm::embed {

inline constexpr const char* kEndOfTweet = "<eot>";

struct UserEmbedding {
  std::string user_id;
  std::string anchor_tweet_id;
  Eigen::VectorXd vector;
  EmbeddingMethod method = EmbeddingMethod::cascade;
  bool empty_history = false;
  bool zero_norm = false;  // the weighted sum vanished
};

// The encoded history of one labeled tweet, oldest tweet first.
struct AnchorHistory {
  std::string user_id;
  std::string anchor_tweet_id;
  std::vector<EncodedTokens> tweets;
};

// Concatenates the tweets in order with `boundary` between consecutive ones.
template <typename T>
std::vector<T> merge_history_document(const std::vector<std::vector<T>>& tweets, const T& boundary) {
  if (tweets.empty()) throw HistoryError("merge_history_document: history is empty");
  std::vector<T> merged;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    if (i > 0) merged.push_back(boundary);
    merged.insert(merged.end(), tweets[i].begin(), tweets[i].end());
  }
  return merged;
}

struct CascadeModels {
  ParagraphVectorModel documents;
  PersonalityNet personality;
  FusionModel fusion;

  int dim() const { return fusion.dim(); }

  // e = fuse(infer(doc), personality_features(doc)).
  Eigen::VectorXd embed_document(std::span<const int> doc) const {
    return fusion.fuse(documents.infer(doc), personality_features(doc, &personality));
  }

  nlohmann::json to_json() {
    return {{"paragraph_vectors", documents.to_json()},
            {"personality", personality.to_json()},
            {"fusion", fusion.to_json()}};
  }

  static CascadeModels from_json(const nlohmann::json& j) {
    return {ParagraphVectorModel::from_json(j.at("paragraph_vectors")), PersonalityNet::from_json(j.at("personality")),
            FusionModel::from_json(j.at("fusion"))};
  }
};

struct CascadeConfig {
  ParagraphVectorConfig paragraph_vectors;
  PersonalityConfig personality;
  int embed_dim = 100;
  double fusion_epsilon = 1e-3;
};

// Trains paragraph vectors on `documents`, the personality net on
// `personality_corpus`, and fits the fusion on (v, p) pairs computed for every
// document with content.
inline CascadeModels fit_cascade(const std::vector<Document>& documents,
                                 const std::vector<PersonalityExample>& personality_corpus,
                                 const WordEmbeddingMatrix& words, const CascadeConfig& config) {
  CascadeModels models;
  models.documents = train_paragraph_vectors(documents, static_cast<std::size_t>(words.rows()), config.paragraph_vectors);
  models.personality = train_personality_net(personality_corpus, words, config.personality);
  std::vector<const Document*> usable;
  for (const auto& doc : documents) {
    if (std::any_of(doc.begin(), doc.end(), detail::is_content_id)) usable.push_back(&doc);
  }
  Eigen::MatrixXd views_v(static_cast<Eigen::Index>(usable.size()), models.documents.dim());
  Eigen::MatrixXd views_p(static_cast<Eigen::Index>(usable.size()), models.personality.dim());
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    views_v.row(row) = models.documents.infer(*usable[i]).transpose();
    views_p.row(row) = models.personality.features(*usable[i]).transpose();
  }
  models.fusion = fit_fusion(views_v, views_p, config.embed_dim, config.fusion_epsilon);
  return models;
}

namespace detail {

inline UserEmbedding empty_embedding(const AnchorHistory& h, EmbeddingMethod method, int dim) {
  return {h.user_id, h.anchor_tweet_id, Eigen::VectorXd::Zero(dim), method, true, false};
}

inline UserEmbedding aggregate_embedding(const AnchorHistory& h, EmbeddingMethod method,
                                         const std::vector<Eigen::VectorXd>& per_tweet) {
  const auto weights = temporal_weights(static_cast<long>(per_tweet.size()));
  Aggregate agg = weighted_aggregate(per_tweet, weights);
  return {h.user_id, h.anchor_tweet_id, std::move(agg.vector), method, false, agg.zero};
}

}  // namespace detail

inline UserEmbedding cascade_embed(const AnchorHistory& h, const CascadeModels& models) {
  if (h.tweets.empty()) return detail::empty_embedding(h, EmbeddingMethod::cascade, models.dim());
  const auto doc = merge_history_document<int>(h.tweets, Vocabulary::unk);
  return {h.user_id, h.anchor_tweet_id, models.embed_document(doc), EmbeddingMethod::cascade, false, false};
}

inline UserEmbedding wcascade_embed(const AnchorHistory& h, const CascadeModels& models) {
  if (h.tweets.empty()) return detail::empty_embedding(h, EmbeddingMethod::w_cascade, models.dim());
  std::vector<Eigen::VectorXd> per_tweet;
  per_tweet.reserve(h.tweets.size());
  for (const auto& tweet : h.tweets) per_tweet.push_back(models.embed_document(tweet));
  return detail::aggregate_embedding(h, EmbeddingMethod::w_cascade, per_tweet);
}

// Shared by ED and SUMMARY; a tweet with no tokens contributes a zero state.
inline UserEmbedding encoder_embed(const AnchorHistory& h, const SequenceEncoder& encoder, EmbeddingMethod method) {
  if (h.tweets.empty()) return detail::empty_embedding(h, method, encoder.dim());
  std::vector<Eigen::VectorXd> per_tweet;
  per_tweet.reserve(h.tweets.size());
  for (const auto& tweet : h.tweets) per_tweet.push_back(encoder.encode_state(tweet).vector);
  return detail::aggregate_embedding(h, method, per_tweet);
}

inline UserEmbedding ed_embed(const AnchorHistory& h, const SequenceEncoder& encoder) {
  return encoder_embed(h, encoder, EmbeddingMethod::ed);
}

inline UserEmbedding summary_embed(const AnchorHistory& h, const SequenceEncoder& summarizer) {
  return encoder_embed(h, summarizer, EmbeddingMethod::summary);
}

// Applies `embed` to every history on `workers` threads. The output order
// follows the input order whatever the worker count.
template <typename Fn>
std::vector<UserEmbedding> embed_all(const std::vector<AnchorHistory>& histories, Fn&& embed, int workers = 1) {
  std::vector<UserEmbedding> out(histories.size());
  const auto n_workers = static_cast<std::size_t>(std::clamp<int>(workers, 1, 64));
  if (n_workers == 1 || histories.size() < 2) {
    for (std::size_t i = 0; i < histories.size(); ++i) out[i] = embed(histories[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(n_workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < histories.size(); i += n_workers) out[i] = embed(histories[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---- embedding store --------------------------------------------------
//
// Text form: a JSON header line {"method", "d_e", "count"}, then one row per
// embedding: user_id anchor_tweet_id flags v_1 .. v_d, where flags is "-" or
// a comma-joined subset of empty_history, zero_norm.

struct EmbeddingStore {
  EmbeddingMethod method = EmbeddingMethod::cascade;
  int dim = 0;
  std::vector<UserEmbedding> rows;

  // By anchor tweet id.
  std::unordered_map<std::string, const UserEmbedding*> index() const {
    std::unordered_map<std::string, const UserEmbedding*> out;
    for (const auto& r : rows) out.emplace(r.anchor_tweet_id, &r);
    return out;
  }
};

inline std::string embedding_flags(const UserEmbedding& e) {
  if (e.empty_history && e.zero_norm) return "empty_history,zero_norm";
  if (e.empty_history) return "empty_history";
  if (e.zero_norm) return "zero_norm";
  return "-";
}

inline void write_embeddings(std::ostream& out, const EmbeddingStore& store) {
  nlohmann::json header = {{"method", display_name(store.method)}, {"d_e", store.dim}, {"count", store.rows.size()}};
  out << header.dump() << '\n';
  for (const auto& e : store.rows) {
    for (const auto* id : {&e.user_id, &e.anchor_tweet_id}) {
      if (id->empty() || id->find_first_of(" \t\r\n") != std::string::npos) {
        throw IntegrityError("embedding store: id '" + *id + "' is empty or contains whitespace");
      }
    }
    if (e.vector.size() != store.dim) throw IntegrityError("embedding store: row dimension differs from d_e");
    out << e.user_id << ' ' << e.anchor_tweet_id << ' ' << embedding_flags(e);
    for (Eigen::Index k = 0; k < e.vector.size(); ++k) out << ' ' << format_double(e.vector(k), 9);
    out << '\n';
  }
}

inline EmbeddingStore read_embeddings(std::istream& in) {
  EmbeddingStore store;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("embedding store: missing header", 1);
  try {
    const auto header = nlohmann::json::parse(line);
    store.method = parse_method(header.at("method").get<std::string>());
    store.dim = header.at("d_e").get<int>();
    store.rows.reserve(header.at("count").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("embedding store header: ") + e.what(), 1);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    UserEmbedding e;
    std::string flags;
    if (!(row >> e.user_id >> e.anchor_tweet_id >> flags)) throw ParseError("embedding store: short row", line_no);
    e.method = store.method;
    e.empty_history = flags.find("empty_history") != std::string::npos;
    e.zero_norm = flags.find("zero_norm") != std::string::npos;
    e.vector.resize(store.dim);
    for (int k = 0; k < store.dim; ++k) {
      if (!(row >> e.vector(k))) throw ParseError("embedding store: expected " + std::to_string(store.dim) + " values", line_no);
    }
    std::string extra;
    if (row >> extra) throw ParseError("embedding store: trailing values", line_no);
    store.rows.push_back(std::move(e));
  }
  return store;
}

}  // namespace sarcasm::embed
