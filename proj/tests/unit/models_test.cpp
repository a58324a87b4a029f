#include <gtest/gtest.h>

#include "sarcasm/models/trainer.hpp"
#include "sarcasm/synthetic.hpp"
#include "support/scenarios.hpp"

using namespace sarcasm;
using namespace sarcasm::models;
using namespace testing_support;

namespace {

struct Toy {
  Vocabulary vocab;
  WordEmbeddingMatrix words;
  std::vector<Example> examples;
};

Toy toy_examples(std::uint64_t seed, int word_dim = 100) {
  Toy toy;
  const auto dataset = synthetic::toy_corpus(seed);
  std::vector<Tokens> tokens;
  for (const auto& t : dataset.tweets) tokens.push_back(tokenize(t.text));
  toy.vocab = Vocabulary::build(tokens);
  toy.words = load_word_vectors("random", toy.vocab, word_dim, seed);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    toy.examples.push_back({dataset.tweets[i].id, encode(tokens[i], toy.vocab), std::nullopt, *dataset.tweets[i].label});
  }
  return toy;
}

// e = +1 vector for sarcastic, -1 vector otherwise.
std::vector<Example> separable_examples(std::size_t n, int d_e, std::size_t offset = 0) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool s = i % 3 == 0;
    out.push_back({"e" + std::to_string(offset + i), {2, 3, 4}, nn::Vector::Constant(d_e, s ? 1.0 : -1.0),
                   s ? Label::sarcastic : Label::non_sarcastic});
  }
  return out;
}

}  // namespace

TEST(SiarnAttention, SingleTokenAttendsToItself) {
  Rng rng(1);
  WordEmbeddingMatrix words = uniform_matrix(rng, 6, 4);
  Siarn siarn(words, 3, rng);
  nn::Tape tape(false);
  const std::vector<int> one = {3};
  const auto f = siarn.forward(tape, one);
  EXPECT_NEAR(f.attention.value()(0, 0), 1.0, 1e-15);
  EXPECT_NEAR((f.attended.value().col(0) - words.row(3).transpose()).norm(), 0.0, 1e-15);
  EXPECT_EQ(f.scores.value()(0, 0), 0.0);
}

TEST(SiarnAttention, DominantPairSharesAttention) {
  Rng rng(2);
  WordEmbeddingMatrix words = uniform_matrix(rng, 6, 2);
  Siarn siarn(words, 3, rng);
  siarn.pair_weight().value.setZero();
  siarn.pair_bias().value(0, 0) = 20.0;
  const std::vector<int> two = {2, 4};
  nn::Tape tape(false);
  const auto f = siarn.forward(tape, two);
  EXPECT_NEAR(f.attention.value()(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(f.attention.value()(1, 0), 0.5, 1e-12);
}

TEST(SiarnAttention, MatchesDoubleLoopReference) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng.index(6));
    const int L = 1 + static_cast<int>(rng.index(12));
    const Matrix x = uniform_matrix(rng, d, L);
    const Matrix w = uniform_matrix(rng, 1, 2 * d, 2.0);
    const double b = rng.uniform(-1.0, 1.0);
    nn::Tape tape(false);
    nn::Var s = intra_attention_scores(tape.constant(x), tape.constant(w), tape.constant(Matrix::Constant(1, 1, b)));
    nn::Var va = nn::matmul(tape.constant(x), nn::softmax(s));
    EXPECT_LT((va.value().col(0) - reference_attended(x, w, b)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(SiarnAttention, FeaturesAreAttendedThenComposed) {
  Rng rng(4);
  WordEmbeddingMatrix words = uniform_matrix(rng, 10, 5);
  Siarn siarn(words, 4, rng);
  const std::vector<int> ids = {2, 7, 3, 9};
  Matrix x(5, 4);
  for (int i = 0; i < 4; ++i) x.col(i) = words.row(ids[static_cast<std::size_t>(i)]).transpose();
  const auto f = siarn.features(ids);
  ASSERT_EQ(f.size(), 9);
  EXPECT_LT((f.head(5) - reference_attended(x, siarn.pair_weight().value, siarn.pair_bias().value(0, 0))).norm(), 1e-12);
  EXPECT_THROW(siarn.features(std::vector<int>{}), DomainError);
  EXPECT_THROW(siarn.features(std::vector<int>{10}), DomainError);
}

TEST(Gradients, PairScorer) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = pair_scorer_gradients(seed);
    EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
  }
}

TEST(Gradients, ExclusiveHead) {
  const auto r = exclusive_head_gradients(1);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
}

TEST(Gradients, InclusiveHeadThroughSiarn) {
  const auto r = inclusive_head_gradients(1);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
}

TEST(Gradients, EncoderDecoder) {
  const auto r = seq2seq_gradients(1);
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
}

TEST(Heads, ExclusiveZeroInputsGiveUniform) {
  Rng rng(5);
  SoftmaxHead head(4, rng);
  head.weight().value.setZero();
  const auto p = exclusive_forward(nn::Vector::Zero(4), head);
  EXPECT_DOUBLE_EQ(p.probability[0], 0.5);
  EXPECT_DOUBLE_EQ(p.probability[1], 0.5);
}

TEST(Heads, ProbabilitiesSumToOneAndIgnoreLogitShift) {
  Rng rng(6);
  SoftmaxHead head(5, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const nn::Vector e = uniform_matrix(rng, 5, 1, 3.0).col(0);
    const auto p = exclusive_forward(e, head);
    EXPECT_NEAR(p.probability[0] + p.probability[1], 1.0, 1e-12);
    const auto shifted = make_prediction("x", (head.logits(e).array() + 123.0).matrix());
    EXPECT_NEAR(shifted.p_sarcastic(), p.p_sarcastic(), 1e-12);
  }
  EXPECT_THROW(exclusive_forward(nn::Vector::Zero(3), head), ConfigError);
}

TEST(Heads, InclusiveBlockStructure) {
  Rng rng(7);
  SoftmaxHead head(7, rng);
  const nn::Vector f = uniform_matrix(rng, 4, 1).col(0);
  const nn::Vector e = uniform_matrix(rng, 3, 1).col(0);

  const auto p = inclusive_forward(f, e, head);
  const nn::Matrix& w = head.weight().value;
  nn::Vector z = w.leftCols(4) * f + w.rightCols(3) * e + head.bias().value.col(0);
  const double oracle = 1.0 / (1.0 + std::exp(z(0) - z(1)));
  EXPECT_NEAR(p.p_sarcastic(), oracle, 1e-12);

  SoftmaxHead text_only(4, rng);
  text_only.weight().value = w.leftCols(4);
  text_only.bias().value = head.bias().value;
  head.weight().value.rightCols(3).setZero();
  EXPECT_NEAR(inclusive_forward(f, e, head).p_sarcastic(), exclusive_forward(f, text_only).p_sarcastic(), 1e-12);

  head.weight().value.setZero();
  head.bias().value.setZero();
  EXPECT_DOUBLE_EQ(inclusive_forward(nn::Vector::Zero(4), nn::Vector::Zero(3), head).p_sarcastic(), 0.5);
}

TEST(ModelSpec, ParsesNames) {
  EXPECT_EQ(ModelSpec::parse("siarn").name(), "SIARN");
  EXPECT_EQ(ModelSpec::parse("ex-wcascade").name(), "EX-W-CASCADE");
  EXPECT_EQ(ModelSpec::parse("IN-W-CASCADE").name(), "IN-W-CASCADE");
  EXPECT_EQ(ModelSpec::parse("in_ed").name(), "IN-ED");
  EXPECT_EQ(ModelSpec::parse("ex-summary").name(), "EX-SUMMARY");
  EXPECT_THROW(ModelSpec::parse("lstm"), ConfigError);
  EXPECT_THROW(ModelSpec::parse("ex-glove"), ConfigError);
}

TEST(Train, SiarnOverfitsToySet) {
  const auto toy = toy_examples(1);
  const auto run = train(ModelSpec::parse("siarn"), toy.examples, {}, ExperimentConfig::riloff(), toy.words);
  ASSERT_EQ(run.metrics.size(), 30u);
  EXPECT_GE(run.metrics.back().train_f1, 0.95);
  EXPECT_EQ(run.selected_epoch, 30);
}

TEST(Train, ExclusiveOnSeparableEmbeddingsIsPerfect) {
  const int d_e = 8;
  ExperimentConfig config;
  config.embed_dim = d_e;
  config.epochs = 20;
  config.learning_rate = 0.01;
  const WordEmbeddingMatrix words = WordEmbeddingMatrix::Zero(5, config.word_dim);
  const auto run = train(ModelSpec::parse("ex-ed"), separable_examples(60, d_e), separable_examples(30, d_e, 100),
                         config, words);
  EXPECT_DOUBLE_EQ(run.metrics[static_cast<std::size_t>(run.selected_epoch - 1)].valid_f1, 1.0);
  EXPECT_DOUBLE_EQ(dataset_f1(run.model, separable_examples(30, d_e, 200)), 1.0);
}

TEST(Train, SameSeedSameMetrics) {
  const auto toy = toy_examples(2, 16);
  ExperimentConfig config;
  config.word_dim = 16;
  config.composition_dim = 8;
  config.epochs = 3;
  const std::vector<Example> valid(toy.examples.begin(), toy.examples.begin() + 16);
  const auto a = train(ModelSpec::parse("siarn"), toy.examples, valid, config, toy.words);
  const auto b = train(ModelSpec::parse("siarn"), toy.examples, valid, config, toy.words);
  ASSERT_EQ(a.metrics.size(), b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    EXPECT_EQ(a.metrics[i].train_loss, b.metrics[i].train_loss);
    EXPECT_EQ(a.metrics[i].valid_f1, b.metrics[i].valid_f1);
  }
  EXPECT_EQ(training_sidecar(a, config), training_sidecar(b, config));
}

TEST(Train, RejectsBadInputs) {
  const auto toy = toy_examples(3, 16);
  ExperimentConfig config;
  config.word_dim = 16;
  EXPECT_THROW(train(ModelSpec::parse("siarn"), {}, {}, config, toy.words), DomainError);
  config.word_dim = 12;
  EXPECT_THROW(train(ModelSpec::parse("siarn"), toy.examples, {}, config, toy.words), ConfigError);
  config.word_dim = 16;
  config.learning_rate = 0.0;
  EXPECT_THROW(train(ModelSpec::parse("siarn"), toy.examples, {}, config, toy.words), ConfigError);
  config.learning_rate = 0.001;
  EXPECT_THROW(train(ModelSpec::parse("ex-ed"), toy.examples, {}, config, toy.words), ConfigError);
}

TEST(Predict, BatchingEmptyInputAndMissingEmbeddings) {
  const auto toy = toy_examples(4, 16);
  Rng rng(4);
  Classifier model(ModelSpec::parse("in-ed"), toy.words, 3, 5, rng);
  std::vector<Example> inputs(toy.examples.begin(), toy.examples.begin() + 10);
  for (auto& ex : inputs) ex.embedding = nn::Vector::Constant(3, 0.2);
  inputs[4].embedding.reset();
  inputs[6].embedding = nn::Vector::Zero(2);

  const auto all = predict(model, inputs, 4);
  ASSERT_EQ(all.size(), 10u);
  EXPECT_FALSE(all[4].prediction);
  EXPECT_FALSE(all[6].prediction);
  EXPECT_FALSE(all[4].error.empty());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto single = predict(model, std::span<const Example>(&inputs[i], 1));
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].tweet_id, all[i].tweet_id);
    if (all[i].prediction) {
      EXPECT_EQ(single[0].prediction->probability, all[i].prediction->probability);
      EXPECT_EQ(predict(model, inputs, 512)[i].prediction->probability, all[i].prediction->probability);
    }
  }
  EXPECT_TRUE(predict(model, std::vector<Example>{}).empty());
}

TEST(Classifier, JsonRoundTrip) {
  const auto toy = toy_examples(5, 8);
  Rng rng(5);
  Classifier model(ModelSpec::parse("in-wcascade"), toy.words, 4, 3, rng);
  Example ex = toy.examples[0];
  ex.embedding = nn::Vector::Constant(4, -0.3);
  const auto back = Classifier::from_json(model.to_json());
  EXPECT_EQ(back.spec().name(), "IN-W-CASCADE");
  EXPECT_EQ(back.predict(ex).probability, model.predict(ex).probability);
}
