#pragma once

// Paragraph vectors, distributed bag-of-words variant: each document vector
// is trained to predict the document's words against sampled noise words
// (negative sampling). Word output vectors are shared across documents;
// inference freezes them and fits a fresh document vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/common/hash.hpp"
#include "sarcasm/common/log.hpp"
#include "sarcasm/common/random.hpp"
#include "sarcasm/nn/checkpoint.hpp"
#include "sarcasm/preprocess.hpp"

namespace sarcasm::embed {

struct ParagraphVectorConfig {
  int dim = 100;
  int epochs = 20;
  int negatives = 5;
  double learning_rate = 0.025;
  double min_learning_rate = 0.0001;
  int infer_epochs = 50;
  std::uint64_t seed = 1;
};

using Document = std::vector<int>;

namespace detail {

inline constexpr std::size_t kNoiseTableSize = 1 << 20;

// Token ids usable as prediction targets: specials carry no content.
inline bool is_content_id(int id) { return id != Vocabulary::pad && id != Vocabulary::unk; }

inline double logistic(double x) {
  if (x > 30) return 1.0;
  if (x < -30) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace detail

class ParagraphVectorModel {
 public:
  ParagraphVectorModel() = default;

  int dim() const { return static_cast<int>(word_out_.cols()); }
  std::size_t document_count() const { return static_cast<std::size_t>(doc_vectors_.rows()); }
  const ParagraphVectorConfig& config() const { return config_; }

  Eigen::VectorXd trained_vector(std::size_t doc) const { return doc_vectors_.row(static_cast<Eigen::Index>(doc)).transpose(); }

  // Fits a vector for an unseen document with the word tables frozen. The
  // starting point and noise draws are seeded from the model seed and the
  // document contents, so the result is a pure function of both.
  Eigen::VectorXd infer(std::span<const int> doc) const {
    const Eigen::Index d = word_out_.cols();
    std::vector<int> words;
    for (int id : doc) {
      if (detail::is_content_id(id) && id < word_out_.rows()) words.push_back(id);
    }
    if (words.empty()) {
      log::warn("paragraph vector inference on an empty document; returning the zero vector");
      return Eigen::VectorXd::Zero(d);
    }
    Rng rng(mix_seed(config_.seed, Fingerprint().add(doc).value()));
    Eigen::VectorXd vec(d);
    for (Eigen::Index k = 0; k < d; ++k) vec(k) = (rng.uniform() - 0.5) / static_cast<double>(d);
    const std::size_t total = words.size() * static_cast<std::size_t>(config_.infer_epochs);
    std::size_t processed = 0;
    Eigen::VectorXd grad(d);
    for (int epoch = 0; epoch < config_.infer_epochs; ++epoch) {
      for (int word : words) {
        const double alpha = learning_rate_at(processed++, total);
        grad.setZero();
        accumulate_pair(vec, word, 1.0, alpha, grad, nullptr);
        for (int k = 0; k < config_.negatives; ++k) {
          const int noise = draw_noise(rng);
          if (noise == word) continue;
          accumulate_pair(vec, noise, 0.0, alpha, grad, nullptr);
        }
        vec += grad;
      }
    }
    return vec;
  }

  nlohmann::json to_json() const {
    return {{"dim", dim()},
            {"epochs", config_.epochs},
            {"negatives", config_.negatives},
            {"learning_rate", config_.learning_rate},
            {"min_learning_rate", config_.min_learning_rate},
            {"infer_epochs", config_.infer_epochs},
            {"seed", config_.seed},
            {"word_out", nn::matrix_to_json(word_out_)},
            {"doc_vectors", nn::matrix_to_json(doc_vectors_)},
            {"counts", counts_}};
  }

  static ParagraphVectorModel from_json(const nlohmann::json& j) {
    ParagraphVectorModel m;
    m.config_.dim = j.at("dim").get<int>();
    m.config_.epochs = j.at("epochs").get<int>();
    m.config_.negatives = j.at("negatives").get<int>();
    m.config_.learning_rate = j.at("learning_rate").get<double>();
    m.config_.min_learning_rate = j.at("min_learning_rate").get<double>();
    m.config_.infer_epochs = j.at("infer_epochs").get<int>();
    m.config_.seed = j.at("seed").get<std::uint64_t>();
    m.word_out_ = nn::matrix_from_json(j.at("word_out"));
    m.doc_vectors_ = nn::matrix_from_json(j.at("doc_vectors"));
    m.counts_ = j.at("counts").get<std::vector<std::size_t>>();
    m.build_noise_table();
    return m;
  }

 private:
  friend ParagraphVectorModel train_paragraph_vectors(const std::vector<Document>&, std::size_t,
                                                      const ParagraphVectorConfig&);

  double learning_rate_at(std::size_t processed, std::size_t total) const {
    const double progress = total == 0 ? 0.0 : static_cast<double>(processed) / static_cast<double>(total);
    return std::max(config_.min_learning_rate, config_.learning_rate * (1.0 - progress));
  }

  int draw_noise(Rng& rng) const { return noise_table_[rng.index(noise_table_.size())]; }

  // One logistic term for (doc vector, word): adds the doc-vector step to
  // `grad` and, when `word_out` is given, updates that word's output row.
  void accumulate_pair(const Eigen::VectorXd& vec, int word, double label, double alpha,
                       Eigen::VectorXd& grad, Eigen::MatrixXd* word_out) const {
    const auto row = word_out_.row(word);
    const double score = detail::logistic(row.dot(vec));
    const double step = alpha * (label - score);
    grad += step * row.transpose();
    if (word_out) word_out->row(word) += step * vec.transpose();
  }

  // Unigram^0.75 sampling table over content ids.
  void build_noise_table() {
    std::vector<double> mass(counts_.size(), 0.0);
    double norm = 0.0;
    for (std::size_t id = 0; id < counts_.size(); ++id) {
      if (!detail::is_content_id(static_cast<int>(id))) continue;
      mass[id] = std::pow(static_cast<double>(counts_[id]), 0.75);
      norm += mass[id];
    }
    noise_table_.clear();
    if (norm == 0.0) return;
    noise_table_.reserve(detail::kNoiseTableSize);
    std::size_t id = 0;
    double cumulative = mass[0] / norm;
    for (std::size_t slot = 0; slot < detail::kNoiseTableSize; ++slot) {
      const double target = (static_cast<double>(slot) + 0.5) / static_cast<double>(detail::kNoiseTableSize);
      while ((cumulative < target || mass[id] == 0.0) && id + 1 < counts_.size()) {
        ++id;
        cumulative += mass[id] / norm;
      }
      noise_table_.push_back(static_cast<int>(id));
    }
  }

  ParagraphVectorConfig config_;
  Eigen::MatrixXd word_out_;
  Eigen::MatrixXd doc_vectors_;
  std::vector<std::size_t> counts_;
  std::vector<int> noise_table_;
};

// Trains document vectors for `corpus` (token ids below vocab_size). The
// learning rate decays linearly over all word visits; documents are visited
// in a seeded order that is reshuffled every epoch.
inline ParagraphVectorModel train_paragraph_vectors(const std::vector<Document>& corpus, std::size_t vocab_size,
                                                    const ParagraphVectorConfig& config) {
  if (config.dim < 1) throw ConfigError("paragraph vectors: dim must be >= 1");
  if (corpus.empty()) throw DomainError("paragraph vectors: corpus is empty");
  ParagraphVectorModel model;
  model.config_ = config;
  model.counts_.assign(vocab_size, 0);
  std::size_t total_words = 0;
  for (const auto& doc : corpus) {
    for (int id : doc) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) throw DomainError("paragraph vectors: token id out of range");
      if (detail::is_content_id(id)) {
        ++model.counts_[static_cast<std::size_t>(id)];
        ++total_words;
      }
    }
  }
  if (total_words == 0) throw DomainError("paragraph vectors: corpus has no content tokens");
  model.build_noise_table();

  const auto d = static_cast<Eigen::Index>(config.dim);
  Rng rng(config.seed);
  model.doc_vectors_.resize(static_cast<Eigen::Index>(corpus.size()), d);
  for (Eigen::Index i = 0; i < model.doc_vectors_.rows(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) model.doc_vectors_(i, k) = (rng.uniform() - 0.5) / static_cast<double>(d);
  }
  model.word_out_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vocab_size), d);

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t total = total_words * static_cast<std::size_t>(config.epochs);
  std::size_t processed = 0;
  Eigen::VectorXd grad(d);
  Eigen::VectorXd vec(d);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t doc_index : order) {
      const auto row = static_cast<Eigen::Index>(doc_index);
      for (int word : corpus[doc_index]) {
        if (!detail::is_content_id(word)) continue;
        const double alpha = model.learning_rate_at(processed++, total);
        vec = model.doc_vectors_.row(row).transpose();
        grad.setZero();
        model.accumulate_pair(vec, word, 1.0, alpha, grad, &model.word_out_);
        for (int k = 0; k < config.negatives; ++k) {
          const int noise = model.draw_noise(rng);
          if (noise == word) continue;
          model.accumulate_pair(vec, noise, 0.0, alpha, grad, &model.word_out_);
        }
        model.doc_vectors_.row(row) += grad.transpose();
      }
    }
  }
  return model;
}

}  // namespace sarcasm::embed
