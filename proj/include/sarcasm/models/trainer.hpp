#pragma once

// Mini-batch training of a Classifier with RMSProp on unweighted
// cross-entropy, keeping the parameters of the epoch with the best
// validation F1.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/common/log.hpp"
#include "sarcasm/eval.hpp"
#include "sarcasm/models/classifier.hpp"
#include "sarcasm/nn/optim.hpp"

namespace sarcasm::models {

struct ExperimentConfig {
  int word_dim = 100;
  int epochs = 30;
  double learning_rate = 0.001;
  int batch_size = 16;
  std::uint64_t seed = 1;
  int embed_dim = 100;
  int composition_dim = 100;
  double rms_decay = 0.9;
  double rms_epsilon = 1e-8;

  static ExperimentConfig riloff() { return {}; }
  static ExperimentConfig ptacek() {
    ExperimentConfig c;
    c.batch_size = 512;
    return c;
  }

  void validate() const {
    if (word_dim < 1 || epochs < 0 || batch_size < 1 || embed_dim < 1 || composition_dim < 1) {
      throw ConfigError("experiment config: dimensions and batch size must be >= 1, epochs >= 0");
    }
    if (!(learning_rate > 0) || !(rms_decay >= 0 && rms_decay < 1) || !(rms_epsilon > 0)) {
      throw ConfigError("experiment config: learning rate and epsilon must be > 0, decay in [0, 1)");
    }
  }

  nlohmann::json to_json() const {
    return {{"word_dim", word_dim},         {"epochs", epochs},       {"learning_rate", learning_rate},
            {"batch_size", batch_size},     {"seed", seed},           {"embed_dim", embed_dim},
            {"composition_dim", composition_dim}, {"rms_decay", rms_decay}, {"rms_epsilon", rms_epsilon}};
  }
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_f1 = 0.0;
  double valid_f1 = 0.0;
};

inline nlohmann::json to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"train_f1", m.train_f1}, {"valid_f1", m.valid_f1}};
}

struct TrainingRun {
  Classifier model;
  std::vector<EpochMetrics> metrics;
  int selected_epoch = 0;  // 0 when no epoch ran
};

// F1 on the sarcastic class over the examples that can be scored.
inline double dataset_f1(const Classifier& model, const std::vector<Example>& data) {
  std::vector<Label> predicted;
  std::vector<Label> gold;
  for (const auto& ex : data) {
    predicted.push_back(model.predict(ex).label);
    gold.push_back(ex.label);
  }
  return f1_from_labels(predicted, gold).f1;
}

// Runs exactly config.epochs epochs. Each epoch visits the training set in a
// fresh seeded order; the last partial batch is kept. Ties in validation F1
// go to the later epoch; with an empty validation set the last epoch is
// selected.
inline TrainingRun train(const ModelSpec& spec, const std::vector<Example>& train_data,
                         const std::vector<Example>& valid_data, const ExperimentConfig& config,
                         const WordEmbeddingMatrix& words) {
  config.validate();
  if (train_data.empty()) throw DomainError("train: training set is empty");
  if (spec.uses_text() && words.cols() != config.word_dim) {
    throw ConfigError("train: word vectors have dimension " + std::to_string(words.cols()) + ", config says " +
                      std::to_string(config.word_dim));
  }
  Rng rng(config.seed);
  TrainingRun run;
  run.model = Classifier(spec, words, config.embed_dim, config.composition_dim, rng);
  nn::RmsProp optimizer(run.model.parameters(), config.learning_rate, config.rms_decay, config.rms_epsilon);

  std::vector<std::size_t> order(train_data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  double best_valid = -1.0;
  std::vector<nn::Matrix> best_values;
  nn::Tape tape;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      for (std::size_t k = start; k < end; ++k) {
        const Example& ex = train_data[order[k]];
        tape.clear();
        nn::Var loss = nn::softmax_cross_entropy(run.model.logits(tape, ex), static_cast<int>(ex.label));
        if (!std::isfinite(loss.scalar())) {
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", example " + ex.tweet_id +
                             " (batch starting at position " + std::to_string(start) + ")");
        }
        loss_sum += loss.scalar();
        tape.backward(loss, 1.0 / static_cast<double>(end - start));
      }
      optimizer.step();
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    m.train_f1 = dataset_f1(run.model, train_data);
    m.valid_f1 = valid_data.empty() ? 0.0 : dataset_f1(run.model, valid_data);
    run.metrics.push_back(m);
    log::info(spec.name() + " epoch " + std::to_string(epoch) + ": loss " + format_double(m.train_loss, 5) +
              ", train F1 " + format_fixed(m.train_f1, 3) + ", valid F1 " + format_fixed(m.valid_f1, 3));

    const bool better = valid_data.empty() || m.valid_f1 >= best_valid;
    if (better) {
      best_valid = m.valid_f1;
      run.selected_epoch = epoch;
      best_values.clear();
      for (auto* p : run.model.parameters()) best_values.push_back(p->value);
    }
  }

  if (!best_values.empty()) {
    auto params = run.model.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = std::move(best_values[k]);
  }
  return run;
}

inline nlohmann::json training_sidecar(const TrainingRun& run, const ExperimentConfig& config) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : run.metrics) metrics.push_back(to_json(m));
  return {{"model_kind", run.model.spec().name()},
          {"config", config.to_json()},
          {"metrics", metrics},
          {"selected_epoch", run.selected_epoch}};
}

}  // namespace sarcasm::models
