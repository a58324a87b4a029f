#include <gtest/gtest.h>

#include <sstream>

#include "sarcasm/common/random.hpp"
#include "sarcasm/embed/fusion.hpp"
#include "sarcasm/embed/method.hpp"
#include "sarcasm/embed/temporal.hpp"
#include "sarcasm/embed/user_embedding.hpp"

using namespace sarcasm;
using namespace sarcasm::embed;

namespace {

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      // Box-Muller
      const double u1 = std::max(rng.uniform(), 1e-300);
      const double u2 = rng.uniform();
      m(i, j) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
  }
  return m;
}

}  // namespace

TEST(TemporalWeights, SmallCases) {
  EXPECT_EQ(temporal_weights(1), std::vector<int>{1});
  EXPECT_EQ(temporal_weights(10), (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(temporal_weights(20), (std::vector<int>{1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8, 9, 9, 10, 10}));
  EXPECT_THROW(temporal_weights(0), DomainError);
}

TEST(TemporalWeights, PartitionProperties) {
  for (long n = 1; n <= 60; ++n) {
    const auto w = temporal_weights(n);
    ASSERT_EQ(static_cast<long>(w.size()), n);
    EXPECT_TRUE(std::is_sorted(w.begin(), w.end()));
    EXPECT_EQ(w.back(), n >= 10 ? 10 : w.back());
    std::map<int, long> counts;
    for (int v : w) ++counts[v];
    for (const auto& [v, c] : counts) {
      EXPECT_GE(v, 1);
      EXPECT_LE(v, 10);
      EXPECT_TRUE(c == n / 10 || c == (n + 9) / 10) << "n=" << n << " value " << v;
    }
  }
}

TEST(WeightedAggregate, NormalizesAndFlagsCancellation) {
  const auto one = weighted_aggregate({Eigen::Vector2d(3, 4)}, std::vector<int>{1});
  EXPECT_NEAR(one.vector(0), 0.6, 1e-12);
  EXPECT_NEAR(one.vector(1), 0.8, 1e-12);
  EXPECT_FALSE(one.zero);
  const auto cancel = weighted_aggregate({Eigen::Vector2d(1, -2), Eigen::Vector2d(-1, 2)}, std::vector<int>{3, 3});
  EXPECT_TRUE(cancel.zero);
  EXPECT_TRUE(cancel.vector.isZero(0.0));
  EXPECT_THROW(weighted_aggregate({Eigen::Vector2d(1, 0)}, std::vector<int>{1, 2}), DomainError);
}

TEST(WeightedAggregate, MatchesDirectComputation) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.index(25);
    std::vector<Eigen::VectorXd> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(gaussian(rng, 6, 1).col(0));
    const auto w = temporal_weights(static_cast<long>(n));
    Eigen::VectorXd s = Eigen::VectorXd::Zero(6);
    for (std::size_t i = 0; i < n; ++i) s += w[i] * xs[i];
    EXPECT_LT((weighted_aggregate(xs, w).vector - s / s.norm()).norm(), 1e-12);
  }
}

TEST(Fusion, LinearlyDependentViewsCorrelatePerfectly) {
  Rng rng(1);
  const Eigen::MatrixXd v = gaussian(rng, 500, 8);
  const Eigen::MatrixXd a = gaussian(rng, 8, 8) + 3.0 * Eigen::MatrixXd::Identity(8, 8);
  const Eigen::MatrixXd p = v * a.transpose();
  const auto model = fit_fusion(v, p, 8, 1e-9);
  for (Eigen::Index k = 0; k < 8; ++k) EXPECT_NEAR(model.correlations(k), 1.0, 1e-6);
}

TEST(Fusion, IndependentViewsCorrelateWeakly) {
  Rng rng(2);
  const auto model = fit_fusion(gaussian(rng, 1000, 5), gaussian(rng, 1000, 5), 5);
  EXPECT_LT(model.correlations.maxCoeff(), 0.2);
}

TEST(Fusion, IdenticalViewsProjectAlike) {
  Rng rng(3);
  const Eigen::MatrixXd v = gaussian(rng, 200, 4);
  const auto model = fit_fusion(v, v, 3);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = v.row(i).transpose();
    EXPECT_LT((model.fuse(x, x) - model.project_v(x)).norm(), 1e-8);
  }
}

TEST(Fusion, Preconditions) {
  Rng rng(4);
  const Eigen::MatrixXd v = gaussian(rng, 20, 4);
  EXPECT_THROW(fit_fusion(v, v, 3, 0.0), NumericError);
  EXPECT_THROW(fit_fusion(v, v.topRows(10), 3), DomainError);
  EXPECT_THROW(fit_fusion(v.topRows(3), v.topRows(3), 3), DomainError);
  EXPECT_THROW(fit_fusion(v, v, 5), ConfigError);
  EXPECT_THROW(FusionModel().project_v(Eigen::VectorXd::Zero(4)), Error);
}

TEST(Fusion, JsonRoundTrip) {
  Rng rng(5);
  const Eigen::MatrixXd v = gaussian(rng, 50, 4);
  const Eigen::MatrixXd p = gaussian(rng, 50, 3);
  const auto model = fit_fusion(v, p, 2);
  const auto back = FusionModel::from_json(model.to_json());
  const Eigen::VectorXd x = v.row(0).transpose();
  const Eigen::VectorXd y = p.row(0).transpose();
  EXPECT_EQ(back.fuse(x, y), model.fuse(x, y));
}

TEST(MergeHistoryDocument, JoinsWithBoundary) {
  const std::vector<std::vector<std::string>> two = {{"a", "b"}, {"c"}};
  EXPECT_EQ(merge_history_document<std::string>(two, kEndOfTweet),
            (std::vector<std::string>{"a", "b", "<eot>", "c"}));
  const std::vector<std::vector<int>> one = {{4, 5, 6}};
  EXPECT_EQ(merge_history_document<int>(one, 1), (std::vector<int>{4, 5, 6}));
  EXPECT_THROW(merge_history_document<int>({}, 1), HistoryError);
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<int>> tweets(1 + rng.index(8));
    std::size_t total = 0;
    for (auto& t : tweets) {
      t.assign(rng.index(6), 7);
      total += t.size();
    }
    EXPECT_EQ(merge_history_document<int>(tweets, 1).size(), total + tweets.size() - 1);
  }
}

TEST(EmbeddingMethod, ParseNames) {
  EXPECT_EQ(parse_method("wcascade"), EmbeddingMethod::w_cascade);
  EXPECT_EQ(parse_method("W_CASCADE"), EmbeddingMethod::w_cascade);
  EXPECT_EQ(parse_method("Summary"), EmbeddingMethod::summary);
  for (auto m : kAllMethods) {
    EXPECT_EQ(parse_method(display_name(m)), m);
    EXPECT_EQ(parse_method(flag_name(m)), m);
  }
  EXPECT_THROW(parse_method("glove"), ConfigError);
}

TEST(EmbeddingStore, TextRoundTrip) {
  EmbeddingStore store;
  store.method = EmbeddingMethod::ed;
  store.dim = 3;
  store.rows.push_back({"u1", "a1", Eigen::Vector3d(0.1, -0.25, 1.0 / 3.0), EmbeddingMethod::ed, false, false});
  store.rows.push_back({"u2", "a2", Eigen::Vector3d::Zero(), EmbeddingMethod::ed, true, false});
  store.rows.push_back({"u2", "a3", Eigen::Vector3d::Zero(), EmbeddingMethod::ed, false, true});
  std::stringstream buffer;
  write_embeddings(buffer, store);
  const auto text = buffer.str();
  const auto back = read_embeddings(buffer);
  EXPECT_EQ(back.method, EmbeddingMethod::ed);
  ASSERT_EQ(back.rows.size(), 3u);
  EXPECT_LT((back.rows[0].vector - store.rows[0].vector).norm(), 1e-8);
  EXPECT_TRUE(back.rows[1].empty_history);
  EXPECT_TRUE(back.rows[2].zero_norm);
  std::stringstream again;
  write_embeddings(again, back);
  EXPECT_EQ(again.str(), text);

  std::istringstream short_row("{\"method\":\"ED\",\"d_e\":3,\"count\":1}\nu a - 1 2\n");
  EXPECT_THROW(read_embeddings(short_row), ParseError);
  store.rows[0].user_id = "has space";
  std::stringstream sink;
  EXPECT_THROW(write_embeddings(sink, store), IntegrityError);
}
