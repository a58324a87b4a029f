#pragma once

// Encoder-decoder used for the ED and SUMMARY user embeddings.
//
// Encoder: bidirectional LSTM over word vectors; the two final states are
// concatenated and linearly projected to d_e, which is the tweet's state
// vector. Decoder: LSTM started from tanh(projection), with general global
// attention over the encoder outputs (score = h_dec' W_a h_enc), an
// attentional layer tanh(W_c [context; h_dec]) and a softmax over the
// vocabulary. Trained with teacher forcing. Index 0 (PAD) doubles as the
// begin and end-of-sequence symbol; it never occurs inside encoded tweets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/common/random.hpp"
#include "sarcasm/nn/checkpoint.hpp"
#include "sarcasm/nn/optim.hpp"
#include "sarcasm/preprocess.hpp"

namespace sarcasm::embed {

enum class Seq2SeqObjective { reconstruct, summarize };

inline const char* to_string(Seq2SeqObjective objective) {
  return objective == Seq2SeqObjective::reconstruct ? "reconstruct" : "summarize";
}

struct Seq2SeqConfig {
  int hidden = 50;      // per direction
  int embed_dim = 100;  // d_e, also the decoder state size
  int epochs = 15;
  double learning_rate = 0.005;
  int batch_size = 16;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct SequencePair {
  std::vector<int> source;
  std::vector<int> target;
};

struct EncodedState {
  nn::Vector vector;
  bool zero = false;  // input had no tokens
};

inline constexpr int kEndOfSequence = Vocabulary::pad;

class SequenceEncoder {
 public:
  SequenceEncoder() = default;

  SequenceEncoder(const WordEmbeddingMatrix& words, const Seq2SeqConfig& config, Seq2SeqObjective objective, Rng& rng)
      : objective_(objective),
        words_("seq2seq.words", words, true),
        forward_("seq2seq.encoder.forward", words.cols(), config.hidden, rng),
        backward_("seq2seq.encoder.backward", words.cols(), config.hidden, rng),
        project_("seq2seq.project", 2 * config.hidden, config.embed_dim, rng),
        decoder_("seq2seq.decoder", words.cols(), config.embed_dim, rng),
        attention_("seq2seq.attention", nn::glorot(2 * config.hidden, config.embed_dim, rng)),
        combine_("seq2seq.combine", 2 * config.hidden + config.embed_dim, config.embed_dim, rng),
        output_("seq2seq.output", config.embed_dim, words.rows(), rng) {
    if (config.hidden < 1) throw ConfigError("seq2seq: hidden size must be >= 1");
    if (config.embed_dim < 1) throw ConfigError("seq2seq: embedding dimension must be >= 1");
  }

  Seq2SeqObjective objective() const { return objective_; }
  int dim() const { return static_cast<int>(project_.out()); }
  int hidden() const { return static_cast<int>(forward_.hidden()); }
  Eigen::Index vocab_size() const { return words_.value.rows(); }
  const std::vector<double>& loss_history() const { return loss_history_; }

  // Final forward and backward states, projected to d_e. PAD tokens are
  // dropped first; an input with no other tokens yields a flagged zero.
  EncodedState encode_state(std::span<const int> tokens) const {
    const auto kept = strip_padding(tokens);
    if (kept.empty()) return {nn::Vector::Zero(dim()), true};
    nn::Tape tape(false);
    const auto encoded = encode(tape, kept);
    return {encoded.projection.value().col(0), false};
  }

  // Mean per-token cross-entropy of emitting target + EOS given source.
  nn::Var sequence_loss(nn::Tape& tape, std::span<const int> source, std::span<const int> target) const {
    const auto encoded = encode(tape, strip_padding(source));
    nn::Lstm::State state{nn::tanh(encoded.projection), tape.constant(nn::Matrix::Zero(dim(), 1))};
    nn::Var previous = tape.constant(nn::Matrix::Zero(words_.value.cols(), 1));
    std::vector<nn::Var> losses;
    for (std::size_t t = 0; t <= target.size(); ++t) {
      state = decoder_.step(tape, previous, state);
      const int gold = t < target.size() ? target[t] : kEndOfSequence;
      losses.push_back(nn::softmax_cross_entropy(output_logits(tape, encoded, state.h), gold));
      if (t < target.size()) previous = tape.row(words_, target[t]);
    }
    nn::Var total = losses.front();
    for (std::size_t k = 1; k < losses.size(); ++k) total = nn::add(total, losses[k]);
    return nn::scale(total, 1.0 / static_cast<double>(losses.size()));
  }

  std::vector<int> greedy_decode(std::span<const int> source, std::size_t max_length) const {
    nn::Tape tape(false);
    const auto encoded = encode(tape, strip_padding(source));
    nn::Lstm::State state{nn::tanh(encoded.projection), tape.constant(nn::Matrix::Zero(dim(), 1))};
    nn::Var previous = tape.constant(nn::Matrix::Zero(words_.value.cols(), 1));
    std::vector<int> out;
    for (std::size_t t = 0; t < max_length; ++t) {
      state = decoder_.step(tape, previous, state);
      Eigen::Index best = 0;
      output_logits(tape, encoded, state.h).value().col(0).maxCoeff(&best);
      if (best == kEndOfSequence) break;
      out.push_back(static_cast<int>(best));
      previous = tape.row(words_, best);
    }
    return out;
  }

  // Fraction of target positions reproduced by greedy decoding.
  double token_accuracy(const std::vector<SequencePair>& pairs) const {
    std::size_t correct = 0;
    std::size_t total = 0;
    for (const auto& pair : pairs) {
      const auto decoded = greedy_decode(pair.source, pair.target.size());
      for (std::size_t i = 0; i < pair.target.size(); ++i) correct += i < decoded.size() && decoded[i] == pair.target[i];
      total += pair.target.size();
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }

  nn::ParameterList parameters() {
    nn::ParameterList out{&words_};
    forward_.collect(out);
    backward_.collect(out);
    project_.collect(out);
    decoder_.collect(out);
    out.push_back(&attention_);
    combine_.collect(out);
    output_.collect(out);
    return out;
  }

  nlohmann::json to_json() {
    return {{"objective", to_string(objective_)},
            {"hidden", hidden()},
            {"embed_dim", dim()},
            {"loss_history", loss_history_},
            {"parameters", nn::parameters_to_json(parameters())}};
  }

  static SequenceEncoder from_json(const nlohmann::json& j) {
    const auto words = nn::matrix_from_json(j.at("parameters").at("seq2seq.words"));
    Seq2SeqConfig config;
    config.hidden = j.at("hidden").get<int>();
    config.embed_dim = j.at("embed_dim").get<int>();
    Rng rng(0);
    const auto objective = j.at("objective").get<std::string>() == "summarize" ? Seq2SeqObjective::summarize
                                                                              : Seq2SeqObjective::reconstruct;
    SequenceEncoder model(words, config, objective, rng);
    nn::parameters_from_json(j.at("parameters"), model.parameters());
    model.loss_history_ = j.at("loss_history").get<std::vector<double>>();
    return model;
  }

 private:
  friend SequenceEncoder train_sequence_model(const std::vector<SequencePair>&, const WordEmbeddingMatrix&,
                                              const Seq2SeqConfig&, Seq2SeqObjective);

  struct Encoded {
    nn::Var memory;      // 2H x L, one column per position
    nn::Var projection;  // d_e x 1
  };

  static std::vector<int> strip_padding(std::span<const int> tokens) {
    std::vector<int> kept;
    for (int id : tokens) {
      if (id != Vocabulary::pad) kept.push_back(id);
    }
    return kept;
  }

  Encoded encode(nn::Tape& tape, const std::vector<int>& tokens) const {
    if (tokens.empty()) throw DomainError("seq2seq: cannot encode an empty sequence");
    std::vector<nn::Var> inputs;
    inputs.reserve(tokens.size());
    for (int id : tokens) {
      if (id < 0 || id >= vocab_size()) throw DomainError("seq2seq: token id out of range");
      inputs.push_back(tape.row(words_, id));
    }
    const auto forward_states = forward_.run(tape, inputs);
    std::vector<nn::Var> reversed(inputs.rbegin(), inputs.rend());
    const auto backward_states = backward_.run(tape, reversed);
    const std::size_t n = inputs.size();
    std::vector<nn::Var> memory_columns;
    memory_columns.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      memory_columns.push_back(nn::concat({forward_states[i].h, backward_states[n - 1 - i].h}));
    }
    nn::Var final_state = nn::concat({forward_states.back().h, backward_states.back().h});
    return {nn::columns(memory_columns), project_(tape, final_state)};
  }

  nn::Var output_logits(nn::Tape& tape, const Encoded& encoded, nn::Var decoder_state) const {
    nn::Var query = nn::matmul(tape.param(attention_), decoder_state);
    nn::Var scores = nn::matmul(nn::transpose(encoded.memory), query);
    nn::Var context = nn::matmul(encoded.memory, nn::softmax(scores));
    nn::Var attentional = nn::tanh(combine_(tape, nn::concat({context, decoder_state})));
    return output_(tape, attentional);
  }

  Seq2SeqObjective objective_ = Seq2SeqObjective::reconstruct;
  nn::Parameter words_;
  nn::Lstm forward_;
  nn::Lstm backward_;
  nn::Linear project_;
  nn::Lstm decoder_;
  nn::Parameter attention_;
  nn::Linear combine_;
  nn::Linear output_;
  std::vector<double> loss_history_;
};

inline SequenceEncoder train_sequence_model(const std::vector<SequencePair>& pairs, const WordEmbeddingMatrix& words,
                                            const Seq2SeqConfig& config, Seq2SeqObjective objective) {
  if (config.hidden < 1) throw ConfigError("seq2seq: hidden size must be >= 1");
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool has_source = std::any_of(pairs[i].source.begin(), pairs[i].source.end(),
                                        [](int id) { return id != Vocabulary::pad; });
    if (has_source) usable.push_back(i);
  }
  if (usable.empty()) throw DomainError("seq2seq: training corpus is empty");
  Rng rng(config.seed);
  SequenceEncoder model(words, config, objective, rng);
  nn::RmsProp optimizer(model.parameters(), config.learning_rate);
  nn::Tape tape;
  const auto batch = static_cast<std::size_t>(std::max(1, config.batch_size));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(usable);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < usable.size(); start += batch) {
      const std::size_t end = std::min(usable.size(), start + batch);
      for (std::size_t k = start; k < end; ++k) {
        const auto& pair = pairs[usable[k]];
        tape.clear();
        nn::Var loss = model.sequence_loss(tape, pair.source, pair.target);
        if (!std::isfinite(loss.scalar())) throw NumericError("seq2seq: non-finite loss in epoch " + std::to_string(epoch + 1));
        epoch_loss += loss.scalar();
        tape.backward(loss, 1.0 / static_cast<double>(end - start));
      }
      optimizer.step(1.0, config.clip_norm);
    }
    model.loss_history_.push_back(epoch_loss / static_cast<double>(usable.size()));
  }
  return model;
}

// Encoder trained to reproduce its input.
inline SequenceEncoder train_autoencoder(const std::vector<std::vector<int>>& corpus, const WordEmbeddingMatrix& words,
                                         const Seq2SeqConfig& config) {
  std::vector<SequencePair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& sequence : corpus) pairs.push_back({sequence, sequence});
  return train_sequence_model(pairs, words, config, Seq2SeqObjective::reconstruct);
}

// Encoder trained to emit a summary of its input.
inline SequenceEncoder train_summarizer(const std::vector<SequencePair>& pairs, const WordEmbeddingMatrix& words,
                                        const Seq2SeqConfig& config) {
  return train_sequence_model(pairs, words, config, Seq2SeqObjective::summarize);
}

// Desk-scale summarization target: the first ceil(n / 3) word tokens of a
// source with n word tokens (punctuation excluded).
inline SequencePair prefix_summary_pair(const Tokens& tokens, const Vocabulary& vocab) {
  Tokens words;
  for (const auto& t : tokens) {
    if (is_word_token(t)) words.push_back(t);
  }
  const std::size_t keep = (words.size() + 2) / 3;
  words.resize(keep);
  return {encode(tokens, vocab), encode(words, vocab)};
}

}  // namespace sarcasm::embed
