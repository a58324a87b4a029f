#pragma once

// Recency weighting of per-tweet history vectors.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sarcasm/common/error.hpp"

namespace sarcasm::embed {

inline constexpr int kTemporalPartitions = 10;

// The chronological history is cut into ten contiguous partitions; tweet i
// (1-based, oldest first) gets its partition number
// floor(10 (i - 1) / n) + 1, so the most recent partition weighs 10.
inline std::vector<int> temporal_weights(long n) {
  if (n <= 0) throw DomainError("temporal_weights: history length must be >= 1");
  std::vector<int> weights(static_cast<std::size_t>(n));
  for (long i = 1; i <= n; ++i) {
    weights[static_cast<std::size_t>(i - 1)] = static_cast<int>((kTemporalPartitions * (i - 1)) / n) + 1;
  }
  return weights;
}

struct Aggregate {
  Eigen::VectorXd vector;
  bool zero = false;  // the weighted sum vanished; vector is all zeros
};

inline constexpr double kZeroNorm = 1e-12;

// s = sum_i w_i x_i, returned as s / |s|.
template <typename Weight>
Aggregate weighted_aggregate(std::span<const Eigen::VectorXd> vectors, std::span<const Weight> weights) {
  if (vectors.empty() || vectors.size() != weights.size()) {
    throw DomainError("weighted_aggregate: need equally many (>= 1) vectors and weights");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(vectors.front().size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != sum.size()) throw DomainError("weighted_aggregate: dimension mismatch");
    sum += static_cast<double>(weights[i]) * vectors[i];
  }
  const double norm = sum.norm();
  if (!(norm >= kZeroNorm)) return {Eigen::VectorXd::Zero(sum.size()), true};
  return {sum / norm, false};
}

inline Aggregate weighted_aggregate(const std::vector<Eigen::VectorXd>& vectors, const std::vector<int>& weights) {
  return weighted_aggregate<int>(std::span<const Eigen::VectorXd>(vectors), std::span<const int>(weights));
}

inline Aggregate weighted_aggregate(const std::vector<Eigen::VectorXd>& vectors, const std::vector<double>& weights) {
  return weighted_aggregate<double>(std::span<const Eigen::VectorXd>(vectors), std::span<const double>(weights));
}

}  // namespace sarcasm::embed
