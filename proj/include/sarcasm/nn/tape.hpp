#pragma once

// Minimal reverse-mode automatic differentiation over Eigen matrices.
//
// A Tape records one forward computation. Each node keeps its value and a
// closure that pushes its gradient to its inputs. Trainable tensors live in
// Parameter objects outside the tape; a parameter node adds its gradient into
// Parameter::grad during Tape::backward. Tapes are single-threaded.

#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sarcasm/common/error.hpp"

namespace sarcasm::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  // Gradient state is filled in by Tape::backward and is not part of the
  // parameter's value, so models stay usable through const references.
  mutable Matrix grad;
  // Embedding tables: only rows read through Tape::row receive gradient and
  // only those rows are updated by the optimizer.
  bool row_sparse = false;
  mutable std::vector<Eigen::Index> touched_rows;

  Parameter() = default;
  Parameter(std::string name_, Matrix init, bool sparse = false)
      : name(std::move(name_)), value(std::move(init)), row_sparse(sparse) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }

  void zero_grad() const {
    if (row_sparse) {
      for (auto r : touched_rows) grad.row(r).setZero();
    } else {
      grad.setZero();
    }
    touched_rows.clear();
  }
};

class Tape;

class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix&)>;

  // An inference tape (track_gradients = false) treats parameters as
  // constants and records no backward closures.
  explicit Tape(bool track_gradients = true) : track_(track_gradients) {}

  bool tracking() const { return track_; }

  Var constant(Matrix value) { return push(std::move(value), false, nullptr); }

  // The node reads p.value in place and adds its gradient straight into
  // p.grad; p must outlive the tape's use.
  Var param(const Parameter& p) {
    Var v = push(Matrix(), track_, nullptr);
    nodes_.back().external = &p.value;
    if (track_) nodes_.back().sink = &p.grad;
    return v;
  }

  // Row `r` of an embedding table as a column vector.
  Var row(const Parameter& table, Eigen::Index r) {
    Matrix value = table.value.row(r).transpose();
    if (!track_) return push(std::move(value), false, nullptr);
    return push(std::move(value), true, [&table, r](Tape&, const Matrix& g) {
      table.grad.row(r) += g.transpose();
      table.touched_rows.push_back(r);
    });
  }

  // Records an op result. The node needs a gradient when any input does.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward back) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || nodes_[static_cast<std::size_t>(v.id())].needs_grad;
    return push(std::move(value), needs, needs ? std::move(back) : nullptr);
  }

  Var record(Matrix value, const std::vector<Var>& inputs, Backward back) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || nodes_[static_cast<std::size_t>(v.id())].needs_grad;
    return push(std::move(value), needs, needs ? std::move(back) : nullptr);
  }

  const Matrix& value(int id) const {
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    return node.external ? *node.external : node.value;
  }

  bool needs_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id())].needs_grad; }

  template <typename Derived>
  void accumulate(Var v, const Eigen::MatrixBase<Derived>& g) {
    auto& node = nodes_[static_cast<std::size_t>(v.id())];
    if (!node.needs_grad) return;
    if (node.sink) {
      node.sink->noalias() += g;
    } else if (node.grad.size() == 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }

  // Adds g to a single entry of v's gradient.
  void accumulate_entry(Var v, Eigen::Index r, Eigen::Index c, double g) {
    auto& node = nodes_[static_cast<std::size_t>(v.id())];
    if (!node.needs_grad) return;
    if (node.sink) {
      (*node.sink)(r, c) += g;
      return;
    }
    if (node.grad.size() == 0) {
      const Matrix& current = value(v.id());
      node.grad = Matrix::Zero(current.rows(), current.cols());
    }
    node.grad(r, c) += g;
  }

  // Backpropagates from a 1x1 node; `seed` scales the whole gradient (used
  // for averaging over a batch).
  void backward(Var loss, double seed = 1.0) {
    auto& root = nodes_[static_cast<std::size_t>(loss.id())];
    if (value(loss.id()).size() != 1) throw DomainError("backward needs a scalar loss");
    if (!root.needs_grad) return;
    root.grad = Matrix::Constant(1, 1, seed);
    for (int id = loss.id(); id >= 0; --id) {
      auto& node = nodes_[static_cast<std::size_t>(id)];
      if (!node.back || node.grad.size() == 0) continue;
      const Matrix grad = std::move(node.grad);
      node.grad.resize(0, 0);
      node.back(*this, grad);
    }
  }

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Backward back;
    const Matrix* external = nullptr;
    Matrix* sink = nullptr;
  };

  Var push(Matrix value, bool needs, Backward back) {
    nodes_.push_back(Node{std::move(value), Matrix(), needs, std::move(back), nullptr, nullptr});
    return Var(this, static_cast<int>(nodes_.size() - 1));
  }

  std::vector<Node> nodes_;
  bool track_ = true;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

// ---- ops --------------------------------------------------------------

inline Var matmul(Var a, Var b) {
  Tape& t = *a.tape();
  return t.record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * t.value(b.id()).transpose());
    if (t.needs_grad(b)) t.accumulate(b, t.value(a.id()).transpose() * g);
  });
}

// W x + b for a weight matrix, column input and column bias.
inline Var affine(Var weight, Var x, Var bias) {
  Tape& t = *weight.tape();
  Matrix out = weight.value() * x.value();
  out += bias.value();
  return t.record(std::move(out), {weight, x, bias}, [weight, x, bias](Tape& t, const Matrix& g) {
    if (t.needs_grad(weight)) t.accumulate(weight, g * t.value(x.id()).transpose());
    if (t.needs_grad(x)) t.accumulate(x, t.value(weight.id()).transpose() * g);
    t.accumulate(bias, g);
  });
}

inline Var add(Var a, Var b) {
  Tape& t = *a.tape();
  return t.record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

inline Var mul(Var a, Var b) {
  Tape& t = *a.tape();
  return t.record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, g.cwiseProduct(t.value(b.id())));
    if (t.needs_grad(b)) t.accumulate(b, g.cwiseProduct(t.value(a.id())));
  });
}

inline Var scale(Var a, double factor) {
  Tape& t = *a.tape();
  return t.record(a.value() * factor, {a}, [a, factor](Tape& t, const Matrix& g) {
    t.accumulate(a, g * factor);
  });
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Var sigmoid(Var a) {
  Tape& t = *a.tape();
  Matrix out = a.value().unaryExpr([](double x) { return sigmoid(x); });
  const int out_id = static_cast<int>(t.size());
  return t.record(std::move(out), {a}, [a, out_id](Tape& t, const Matrix& g) {
    const Matrix& s = t.value(out_id);
    t.accumulate(a, g.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix())));
  });
}

inline Var tanh(Var a) {
  Tape& t = *a.tape();
  Matrix out = a.value().array().tanh().matrix();
  const int out_id = static_cast<int>(t.size());
  return t.record(std::move(out), {a}, [a, out_id](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(out_id);
    t.accumulate(a, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

// Stacks column vectors vertically.
inline Var concat(const std::vector<Var>& parts) {
  Tape& t = *parts.front().tape();
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix out(rows, 1);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  return t.record(std::move(out), parts, [parts](Tape& t, const Matrix& g) {
    Eigen::Index offset = 0;
    for (const auto& p : parts) {
      const auto n = t.value(p.id()).rows();
      if (t.needs_grad(p)) t.accumulate(p, g.middleRows(offset, n));
      offset += n;
    }
  });
}

// Columns side by side: d x L from L column vectors of length d.
inline Var columns(const std::vector<Var>& cols) {
  Tape& t = *cols.front().tape();
  Matrix out(cols.front().rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = cols[j].value();
  return t.record(std::move(out), cols, [cols](Tape& t, const Matrix& g) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (t.needs_grad(cols[j])) t.accumulate(cols[j], g.col(static_cast<Eigen::Index>(j)));
    }
  });
}

inline Var slice(Var a, Eigen::Index start, Eigen::Index length) {
  Tape& t = *a.tape();
  Matrix out = a.value().middleRows(start, length);
  return t.record(std::move(out), {a}, [a, start, length](Tape& t, const Matrix& g) {
    const Matrix& v = t.value(a.id());
    Matrix full = Matrix::Zero(v.rows(), v.cols());
    full.middleRows(start, length) = g;
    t.accumulate(a, full);
  });
}

inline Var transpose(Var a) {
  Tape& t = *a.tape();
  return t.record(a.value().transpose(), {a},
                  [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transpose()); });
}

inline Vector softmax(const Vector& logits) {
  const double shift = logits.maxCoeff();
  Vector e = (logits.array() - shift).exp().matrix();
  return e / e.sum();
}

// Softmax over a column vector.
inline Var softmax(Var a) {
  Tape& t = *a.tape();
  Matrix out = softmax(Vector(a.value().col(0)));
  const int out_id = static_cast<int>(t.size());
  return t.record(std::move(out), {a}, [a, out_id](Tape& t, const Matrix& g) {
    const Matrix& p = t.value(out_id);
    const double dot = (g.array() * p.array()).sum();
    t.accumulate(a, (p.array() * (g.array() - dot)).matrix());
  });
}

// -log softmax(logits)[target], a 1x1 node.
inline Var softmax_cross_entropy(Var logits, Eigen::Index target) {
  Tape& t = *logits.tape();
  const Vector z = logits.value().col(0);
  const double shift = z.maxCoeff();
  const double log_norm = shift + std::log((z.array() - shift).exp().sum());
  Matrix loss = Matrix::Constant(1, 1, log_norm - z(target));
  return t.record(std::move(loss), {logits}, [logits, target](Tape& t, const Matrix& g) {
    Matrix p = softmax(Vector(t.value(logits.id()).col(0)));
    p(target, 0) -= 1.0;
    t.accumulate(logits, p * g(0, 0));
  });
}

// Sum of per-entry binary cross-entropy on sigmoid(logits); entries with
// mask 0 contribute nothing.
inline Var sigmoid_binary_cross_entropy(Var logits, const Vector& targets, const Vector& mask) {
  Tape& t = *logits.tape();
  const Vector z = logits.value().col(0);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (mask(i) == 0.0) continue;
    // log(1 + exp(z)) - y z, computed stably.
    const double softplus = z(i) > 0 ? z(i) + std::log1p(std::exp(-z(i))) : std::log1p(std::exp(z(i)));
    loss += softplus - targets(i) * z(i);
  }
  return t.record(Matrix::Constant(1, 1, loss), {logits},
                  [logits, targets, mask](Tape& t, const Matrix& g) {
                    const Matrix& z = t.value(logits.id());
                    Matrix grad(z.rows(), 1);
                    for (Eigen::Index i = 0; i < z.rows(); ++i) {
                      grad(i, 0) = mask(i) * (sigmoid(z(i, 0)) - targets(i)) * g(0, 0);
                    }
                    t.accumulate(logits, grad);
                  });
}

}  // namespace sarcasm::nn
