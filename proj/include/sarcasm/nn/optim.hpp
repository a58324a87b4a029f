#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sarcasm/nn/layers.hpp"

namespace sarcasm::nn {

// RMSProp: cache <- decay * cache + (1 - decay) g^2;
// value <- value - lr * g / (sqrt(cache) + epsilon).
// Row-sparse parameters update (and decay) only the rows touched since the
// last step.
class RmsProp {
 public:
  RmsProp(ParameterList params, double learning_rate, double decay = 0.9, double epsilon = 1e-8)
      : params_(std::move(params)), learning_rate_(learning_rate), decay_(decay), epsilon_(epsilon) {
    for (auto* p : params_) caches_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }

  // Applies grad * grad_scale, then clears gradients. A positive clip_norm
  // rescales the combined gradient to at most that L2 norm.
  void step(double grad_scale = 1.0, double clip_norm = 0.0) {
    if (clip_norm > 0.0) {
      double squared = 0.0;
      for (auto* p : params_) squared += p->grad.squaredNorm();
      const double norm = std::sqrt(squared) * std::abs(grad_scale);
      if (norm > clip_norm) grad_scale *= clip_norm / norm;
    }
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Parameter& p = *params_[k];
      Matrix& cache = caches_[k];
      if (p.row_sparse) {
        std::sort(p.touched_rows.begin(), p.touched_rows.end());
        p.touched_rows.erase(std::unique(p.touched_rows.begin(), p.touched_rows.end()),
                             p.touched_rows.end());
        for (auto r : p.touched_rows) update(p.value.row(r), p.grad.row(r), cache.row(r), grad_scale);
      } else {
        update(p.value, p.grad, cache, grad_scale);
      }
      p.zero_grad();
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

 private:
  template <typename V, typename G, typename C>
  void update(V&& value, const G& grad, C&& cache, double grad_scale) const {
    const Matrix g = grad * grad_scale;
    cache = decay_ * cache + (1.0 - decay_) * g.cwiseProduct(g);
    value -= (learning_rate_ * g.array() / (cache.array().sqrt() + epsilon_)).matrix();
  }

  ParameterList params_;
  std::vector<Matrix> caches_;
  double learning_rate_;
  double decay_;
  double epsilon_;
};

}  // namespace sarcasm::nn
