#pragma once

// Single-dimension intra-attention network (SIARN) feature extractor.
//
//   s_ij = sigmoid(W_p [w_i; w_j] + b_p)  for i < j, s_ji = s_ij
//   a    = softmax_i(max_{j != i} s_ij)     (the max is 0 for a single word)
//   v_a  = sum_i a_i w_i
//   v_c  = last hidden state of an LSTM over w_1..w_L
//   f    = [v_a; v_c]

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/nn/checkpoint.hpp"
#include "sarcasm/nn/layers.hpp"
#include "sarcasm/preprocess.hpp"

namespace sarcasm::models {

// Row-wise maximum of the symmetric pair-score matrix for the columns of
// `words` (d x L). `pair_weight` is 1 x 2d, `pair_bias` 1 x 1. The gradient
// flows through each row's maximizing pair (first maximum on ties).
inline nn::Var intra_attention_scores(nn::Var words, nn::Var pair_weight, nn::Var pair_bias) {
  nn::Tape& tape = *words.tape();
  const nn::Matrix& x = words.value();
  const Eigen::Index d = x.rows();
  const Eigen::Index length = x.cols();
  const nn::Matrix left = pair_weight.value().leftCols(d) * x;    // 1 x L
  const nn::Matrix right = pair_weight.value().rightCols(d) * x;  // 1 x L
  const double bias = pair_bias.value()(0, 0);

  nn::Matrix scores = nn::Matrix::Zero(length, 1);
  // Per row: the maximizing pair (first < second) and its score.
  std::vector<Eigen::Index> first(static_cast<std::size_t>(length), -1);
  std::vector<Eigen::Index> second(static_cast<std::size_t>(length), -1);
  std::vector<double> best(static_cast<std::size_t>(length), 0.0);
  for (Eigen::Index i = 0; i < length; ++i) {
    bool have = false;
    for (Eigen::Index j = 0; j < length; ++j) {
      if (j == i) continue;
      const Eigen::Index p = std::min(i, j);
      const Eigen::Index q = std::max(i, j);
      const double s = nn::sigmoid(left(0, p) + right(0, q) + bias);
      const auto k = static_cast<std::size_t>(i);
      if (!have || s > best[k]) {
        best[k] = s;
        first[k] = p;
        second[k] = q;
        have = true;
      }
    }
    scores(i, 0) = have ? best[static_cast<std::size_t>(i)] : 0.0;
  }

  return tape.record(std::move(scores), {words, pair_weight, pair_bias},
                     [words, pair_weight, pair_bias, first, second, best](nn::Tape& t, const nn::Matrix& g) {
                       const nn::Matrix& x = t.value(words.id());
                       const nn::Matrix& w = t.value(pair_weight.id());
                       const Eigen::Index d = x.rows();
                       nn::Matrix grad_x = nn::Matrix::Zero(d, x.cols());
                       nn::Matrix grad_w = nn::Matrix::Zero(1, 2 * d);
                       double grad_b = 0.0;
                       for (std::size_t i = 0; i < first.size(); ++i) {
                         if (first[i] < 0) continue;
                         const double dz = g(static_cast<Eigen::Index>(i), 0) * best[i] * (1.0 - best[i]);
                         grad_w.leftCols(d) += dz * x.col(first[i]).transpose();
                         grad_w.rightCols(d) += dz * x.col(second[i]).transpose();
                         grad_b += dz;
                         grad_x.col(first[i]) += dz * w.leftCols(d).transpose();
                         grad_x.col(second[i]) += dz * w.rightCols(d).transpose();
                       }
                       if (t.needs_grad(words)) t.accumulate(words, grad_x);
                       if (t.needs_grad(pair_weight)) t.accumulate(pair_weight, grad_w);
                       t.accumulate_entry(pair_bias, 0, 0, grad_b);
                     });
}

class Siarn {
 public:
  struct Forward {
    nn::Var words;      // d x L
    nn::Var scores;     // L x 1, row maxima before softmax
    nn::Var attention;  // L x 1
    nn::Var attended;   // v_a
    nn::Var composed;   // v_c
    nn::Var features;   // f
  };

  Siarn() = default;
  Siarn(const WordEmbeddingMatrix& words, int composition_dim, Rng& rng)
      : words_("siarn.words", words, true),
        pair_weight_("siarn.pair.weight", nn::glorot(1, 2 * words.cols(), rng)),
        pair_bias_("siarn.pair.bias", nn::Matrix::Zero(1, 1)),
        composer_("siarn.composer", words.cols(), composition_dim, rng) {}

  Eigen::Index word_dim() const { return words_.value.cols(); }
  Eigen::Index composition_dim() const { return composer_.hidden(); }
  Eigen::Index feature_dim() const { return word_dim() + composition_dim(); }

  Forward forward(nn::Tape& tape, std::span<const int> indices) const {
    if (indices.empty()) throw DomainError("siarn: empty token sequence");
    std::vector<nn::Var> columns;
    columns.reserve(indices.size());
    for (int id : indices) {
      if (id < 0 || id >= words_.value.rows()) throw DomainError("siarn: token id out of range");
      columns.push_back(tape.row(words_, id));
    }
    Forward out;
    out.words = nn::columns(columns);
    out.scores = intra_attention_scores(out.words, tape.param(pair_weight_), tape.param(pair_bias_));
    out.attention = nn::softmax(out.scores);
    out.attended = nn::matmul(out.words, out.attention);
    out.composed = composer_.run(tape, columns).back().h;
    out.features = nn::concat({out.attended, out.composed});
    return out;
  }

  nn::Vector features(std::span<const int> indices) const {
    nn::Tape tape(false);
    return forward(tape, indices).features.value().col(0);
  }

  nn::ParameterList parameters() {
    nn::ParameterList out{&words_, &pair_weight_, &pair_bias_};
    composer_.collect(out);
    return out;
  }

  nn::Parameter& pair_weight() { return pair_weight_; }
  nn::Parameter& pair_bias() { return pair_bias_; }
  nn::Lstm& composer() { return composer_; }
  nn::Parameter& words() { return words_; }

 private:
  nn::Parameter words_;
  nn::Parameter pair_weight_;
  nn::Parameter pair_bias_;
  nn::Lstm composer_;
};

}  // namespace sarcasm::models
