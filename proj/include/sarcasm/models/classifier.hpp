#pragma once

// Output heads and the three model kinds built on them:
//   SIARN      m(t, e) = softmax(W f + b)
//   EX-<m>     m(t, e) = softmax(W e + b)          (tweet text unused)
//   IN-<m>     m(t, e) = softmax(W [f; e] + b)
// Class index 0 is non_sarcastic, 1 is sarcastic.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/corpus.hpp"
#include "sarcasm/embed/method.hpp"
#include "sarcasm/models/siarn.hpp"

namespace sarcasm::models {

inline constexpr int kClasses = 2;

enum class ModelKind { siarn, exclusive, inclusive };

struct ModelSpec {
  ModelKind kind = ModelKind::siarn;
  embed::EmbeddingMethod method = embed::EmbeddingMethod::w_cascade;  // unused for SIARN

  bool uses_text() const { return kind != ModelKind::exclusive; }
  bool uses_embedding() const { return kind != ModelKind::siarn; }

  std::string name() const {
    if (kind == ModelKind::siarn) return "SIARN";
    return std::string(kind == ModelKind::exclusive ? "EX-" : "IN-") + embed::display_name(method);
  }

  // "siarn", "ex-wcascade", "IN-W-CASCADE", "in_ed", ...
  static ModelSpec parse(std::string_view text) {
    const std::string key = to_lower_ascii(text);
    if (key == "siarn") return {};
    ModelSpec spec;
    if (key.rfind("ex-", 0) == 0 || key.rfind("ex_", 0) == 0) {
      spec.kind = ModelKind::exclusive;
    } else if (key.rfind("in-", 0) == 0 || key.rfind("in_", 0) == 0) {
      spec.kind = ModelKind::inclusive;
    } else {
      throw ConfigError("unknown model '" + std::string(text) + "' (expected siarn, ex-<method> or in-<method>)");
    }
    spec.method = embed::parse_method(key.substr(3));
    return spec;
  }
};

struct Example {
  std::string tweet_id;
  EncodedTokens indices;
  std::optional<nn::Vector> embedding;
  Label label = Label::non_sarcastic;
};

struct Prediction {
  std::string tweet_id;
  std::array<double, kClasses> probability{};
  Label label = Label::non_sarcastic;

  double p_sarcastic() const { return probability[1]; }
};

inline Prediction make_prediction(std::string tweet_id, const nn::Vector& logits) {
  const nn::Vector p = nn::softmax(logits);
  Prediction out;
  out.tweet_id = std::move(tweet_id);
  out.probability = {p(0), p(1)};
  out.label = p(1) > p(0) ? Label::sarcastic : Label::non_sarcastic;
  return out;
}

class SoftmaxHead {
 public:
  SoftmaxHead() = default;
  SoftmaxHead(Eigen::Index in, Rng& rng) : layer_("head", in, kClasses, rng) {}

  Eigen::Index in() const { return layer_.in(); }

  nn::Var logits(nn::Tape& tape, nn::Var x) const {
    check(x.rows());
    return layer_(tape, x);
  }

  nn::Vector logits(const nn::Vector& x) const {
    check(x.size());
    return layer_.apply(x);
  }

  nn::Parameter& weight() { return layer_.weight; }
  nn::Parameter& bias() { return layer_.bias; }
  const nn::Parameter& weight() const { return layer_.weight; }
  const nn::Parameter& bias() const { return layer_.bias; }

  void collect(nn::ParameterList& out) { layer_.collect(out); }

 private:
  void check(Eigen::Index n) const {
    if (n != in()) {
      throw ConfigError("softmax head expects input of dimension " + std::to_string(in()) + ", got " + std::to_string(n));
    }
  }

  nn::Linear layer_;
};

// softmax(W e + b). Takes no tweet text.
inline Prediction exclusive_forward(const nn::Vector& e, const SoftmaxHead& head, std::string tweet_id = {}) {
  return make_prediction(std::move(tweet_id), head.logits(e));
}

// softmax(W [f; e] + b).
inline Prediction inclusive_forward(const nn::Vector& f, const nn::Vector& e, const SoftmaxHead& head,
                                    std::string tweet_id = {}) {
  nn::Vector x(f.size() + e.size());
  x << f, e;
  return make_prediction(std::move(tweet_id), head.logits(x));
}

class Classifier {
 public:
  Classifier() = default;

  // `words` seeds SIARN's trainable word table; EX models ignore it.
  Classifier(const ModelSpec& spec, const WordEmbeddingMatrix& words, Eigen::Index embed_dim, int composition_dim,
             Rng& rng)
      : spec_(spec), embed_dim_(spec.uses_embedding() ? embed_dim : 0) {
    Eigen::Index in = embed_dim_;
    if (spec.uses_text()) {
      siarn_ = Siarn(words, composition_dim, rng);
      in += siarn_->feature_dim();
    }
    if (in < 1) throw ConfigError("classifier input dimension must be >= 1");
    head_ = SoftmaxHead(in, rng);
  }

  const ModelSpec& spec() const { return spec_; }
  Eigen::Index embed_dim() const { return embed_dim_; }
  const SoftmaxHead& head() const { return head_; }
  SoftmaxHead& head() { return head_; }
  const std::optional<Siarn>& siarn() const { return siarn_; }
  std::optional<Siarn>& siarn() { return siarn_; }

  // Logit node for one example. Throws ConfigError when the example lacks a
  // usable embedding.
  nn::Var logits(nn::Tape& tape, const Example& ex) const {
    std::vector<nn::Var> parts;
    if (siarn_) parts.push_back(siarn_->forward(tape, ex.indices).features);
    if (spec_.uses_embedding()) {
      if (!ex.embedding) throw ConfigError("no user embedding for tweet " + ex.tweet_id);
      if (ex.embedding->size() != embed_dim_) {
        throw ConfigError("user embedding for tweet " + ex.tweet_id + " has dimension " +
                          std::to_string(ex.embedding->size()) + ", expected " + std::to_string(embed_dim_));
      }
      parts.push_back(tape.constant(*ex.embedding));
    }
    nn::Var x = parts.size() == 1 ? parts.front() : nn::concat(parts);
    return head_.logits(tape, x);
  }

  Prediction predict(const Example& ex) const {
    nn::Tape tape(false);
    return make_prediction(ex.tweet_id, logits(tape, ex).value().col(0));
  }

  nn::ParameterList parameters() {
    nn::ParameterList out;
    if (siarn_) out = siarn_->parameters();
    head_.collect(out);
    return out;
  }

  nlohmann::json to_json() {
    return {{"model", spec_.name()},
            {"embed_dim", embed_dim_},
            {"composition_dim", siarn_ ? siarn_->composition_dim() : 0},
            {"parameters", nn::parameters_to_json(parameters())}};
  }

  static Classifier from_json(const nlohmann::json& j) {
    const ModelSpec spec = ModelSpec::parse(j.at("model").get<std::string>());
    const auto& params = j.at("parameters");
    WordEmbeddingMatrix words(1, 1);
    if (spec.uses_text()) words = nn::matrix_from_json(params.at("siarn.words"));
    Rng rng(0);
    Classifier model(spec, words, j.at("embed_dim").get<Eigen::Index>(), j.at("composition_dim").get<int>(), rng);
    nn::parameters_from_json(params, model.parameters());
    return model;
  }

 private:
  ModelSpec spec_;
  Eigen::Index embed_dim_ = 0;
  std::optional<Siarn> siarn_;
  SoftmaxHead head_;
};

// One entry per input, in input order: a prediction or the reason there is
// none.
struct PredictionOutcome {
  std::string tweet_id;
  std::optional<Prediction> prediction;
  std::string error;
};

// Items are scored independently, so `batch_size` only sets how the input is
// chunked and never changes the outputs.
inline std::vector<PredictionOutcome> predict(const Classifier& model, std::span<const Example> inputs,
                                              std::size_t batch_size = 512) {
  std::vector<PredictionOutcome> out;
  out.reserve(inputs.size());
  const std::size_t batch = std::max<std::size_t>(1, batch_size);
  for (std::size_t start = 0; start < inputs.size(); start += batch) {
    const std::size_t end = std::min(inputs.size(), start + batch);
    for (std::size_t i = start; i < end; ++i) {
      PredictionOutcome outcome{inputs[i].tweet_id, std::nullopt, {}};
      try {
        outcome.prediction = model.predict(inputs[i]);
      } catch (const Error& e) {
        outcome.error = e.what();
      }
      out.push_back(std::move(outcome));
    }
  }
  return out;
}

}  // namespace sarcasm::models
