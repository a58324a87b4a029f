#pragma once

// Five-trait personality network: averaged word vectors -> one tanh hidden
// layer -> five sigmoid outputs. Its hidden layer is the personality view of
// a document.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/common/log.hpp"
#include "sarcasm/nn/checkpoint.hpp"
#include "sarcasm/nn/optim.hpp"
#include "sarcasm/preprocess.hpp"

namespace sarcasm::embed {

inline constexpr int kTraits = 5;

struct PersonalityExample {
  std::vector<int> document;
  std::array<int, kTraits> traits{};  // 0/1 per Big-Five trait
};

struct PersonalityConfig {
  int hidden = 100;
  int epochs = 50;
  double learning_rate = 0.01;
  int batch_size = 16;
  std::uint64_t seed = 1;
};

inline constexpr std::size_t kMinPersonalityExamples = 10;

class PersonalityNet {
 public:
  PersonalityNet() = default;
  PersonalityNet(WordEmbeddingMatrix words, int hidden, Rng& rng)
      : words_(std::move(words)),
        hidden_("personality.hidden", words_.cols(), hidden, rng),
        output_("personality.output", hidden, kTraits, rng) {}

  int dim() const { return static_cast<int>(hidden_.out()); }

  // Mean word vector over content tokens; zero when there are none.
  nn::Vector average(std::span<const int> doc) const {
    nn::Vector sum = nn::Vector::Zero(words_.cols());
    int n = 0;
    for (int id : doc) {
      if (id == Vocabulary::pad || id == Vocabulary::unk || id >= words_.rows()) continue;
      sum += words_.row(id).transpose();
      ++n;
    }
    return n == 0 ? sum : nn::Vector(sum / n);
  }

  // Hidden-layer activations: the document's personality vector.
  nn::Vector features(std::span<const int> doc) const {
    return hidden_.apply(average(doc)).array().tanh().matrix();
  }

  std::array<double, kTraits> trait_probabilities(std::span<const int> doc) const {
    const nn::Vector logits = output_.apply(features(doc));
    std::array<double, kTraits> out{};
    for (int k = 0; k < kTraits; ++k) out[static_cast<std::size_t>(k)] = nn::sigmoid(logits(k));
    return out;
  }

  // Fraction of (example, trait) pairs predicted correctly at threshold 0.5.
  double accuracy(const std::vector<PersonalityExample>& examples) const {
    std::size_t correct = 0;
    for (const auto& ex : examples) {
      const auto probs = trait_probabilities(ex.document);
      for (std::size_t k = 0; k < kTraits; ++k) correct += ((probs[k] >= 0.5) == (ex.traits[k] == 1));
    }
    return examples.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(examples.size() * kTraits);
  }

  nn::ParameterList parameters() {
    nn::ParameterList out;
    hidden_.collect(out);
    output_.collect(out);
    return out;
  }

  nn::Var forward(nn::Tape& tape, std::span<const int> doc) {
    nn::Var x = tape.constant(average(doc));
    nn::Var h = nn::tanh(hidden_(tape, x));
    return output_(tape, h);
  }

  nlohmann::json to_json() {
    return {{"hidden", dim()}, {"words", nn::matrix_to_json(words_)}, {"parameters", nn::parameters_to_json(parameters())}};
  }

  static PersonalityNet from_json(const nlohmann::json& j) {
    Rng rng(0);
    PersonalityNet net(nn::matrix_from_json(j.at("words")), j.at("hidden").get<int>(), rng);
    nn::parameters_from_json(j.at("parameters"), net.parameters());
    return net;
  }

 private:
  WordEmbeddingMatrix words_;
  nn::Linear hidden_;
  nn::Linear output_;
};

// A default-constructed net counts as missing.
inline nn::Vector personality_features(std::span<const int> doc, const PersonalityNet* model) {
  if (model == nullptr || model->dim() == 0) {
    throw ConfigError("no personality model loaded; train one with train_personality_net");
  }
  return model->features(doc);
}

// Per-trait binary cross-entropy, RMSProp. A trait whose labels are all one
// class is left out of the loss (with a warning).
inline PersonalityNet train_personality_net(const std::vector<PersonalityExample>& corpus,
                                            const WordEmbeddingMatrix& words, const PersonalityConfig& config) {
  if (corpus.size() < kMinPersonalityExamples) {
    throw DomainError("train_personality_net: need at least " + std::to_string(kMinPersonalityExamples) +
                      " examples, got " + std::to_string(corpus.size()));
  }
  if (config.hidden < 1) throw ConfigError("personality net: hidden size must be >= 1");
  Rng rng(config.seed);
  PersonalityNet net(words, config.hidden, rng);

  nn::Vector mask = nn::Vector::Ones(kTraits);
  for (std::size_t k = 0; k < kTraits; ++k) {
    std::size_t positives = 0;
    for (const auto& ex : corpus) positives += ex.traits[k] == 1;
    if (positives == 0 || positives == corpus.size()) {
      mask(static_cast<Eigen::Index>(k)) = 0.0;
      log::warn("personality trait " + std::to_string(k) + " has a single class; its loss is skipped");
    }
  }

  nn::RmsProp optimizer(net.parameters(), config.learning_rate);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  nn::Tape tape;
  const auto batch = static_cast<std::size_t>(std::max(1, config.batch_size));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = corpus[order[i]];
        nn::Vector targets(kTraits);
        for (int k = 0; k < kTraits; ++k) targets(k) = ex.traits[static_cast<std::size_t>(k)];
        tape.clear();
        nn::Var loss = nn::sigmoid_binary_cross_entropy(net.forward(tape, ex.document), targets, mask);
        tape.backward(loss, 1.0 / static_cast<double>(end - start));
      }
      optimizer.step();
    }
  }
  return net;
}

}  // namespace sarcasm::embed
