#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sarcasm/common/random.hpp"
#include "sarcasm/nn/tape.hpp"

namespace sarcasm::nn {

// Glorot-uniform initialization from a seeded stream.
inline Matrix glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-limit, limit);
  }
  return m;
}

using ParameterList = std::vector<Parameter*>;

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng)
      : weight(name + ".weight", glorot(out, in, rng)),
        bias(name + ".bias", Matrix::Zero(out, 1)) {}

  Var operator()(Tape& tape, Var x) const { return affine(tape.param(weight), x, tape.param(bias)); }

  Vector apply(const Vector& x) const { return weight.value * x + bias.value.col(0); }

  Eigen::Index in() const { return weight.value.cols(); }
  Eigen::Index out() const { return weight.value.rows(); }

  void collect(ParameterList& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  Parameter weight;
  Parameter bias;
};

// LSTM cell with gate rows ordered input, forget, cell, output.
class Lstm {
 public:
  struct State {
    Var h;
    Var c;
  };

  Lstm() = default;
  Lstm(const std::string& name, Eigen::Index input, Eigen::Index hidden, Rng& rng)
      : weight(name + ".weight", glorot(4 * hidden, input + hidden, rng)),
        bias(name + ".bias", Matrix::Zero(4 * hidden, 1)) {
    bias.value.middleRows(hidden, hidden).setOnes();
  }

  Eigen::Index hidden() const { return weight.value.rows() / 4; }
  Eigen::Index input() const { return weight.value.cols() - hidden(); }

  State initial(Tape& tape) const {
    return {tape.constant(Matrix::Zero(hidden(), 1)), tape.constant(Matrix::Zero(hidden(), 1))};
  }

  // One recorded node per step, holding [h; c]:
  //   z = W [x; h_prev] + b, i = s(z_i), f = s(z_f), g = tanh(z_g), o = s(z_o)
  //   c = f * c_prev + i * g, h = o * tanh(c)
  State step(Tape& tape, Var x, const State& prev) const {
    const Eigen::Index n = hidden();
    const Eigen::Index in = input();
    Vector input_state(in + n);
    input_state << x.value().col(0), prev.h.value().col(0);
    Vector gates = weight.value * input_state + bias.value.col(0);
    gates.head(n) = gates.head(n).unaryExpr([](double v) { return sigmoid(v); });
    gates.segment(n, n) = gates.segment(n, n).unaryExpr([](double v) { return sigmoid(v); });
    gates.segment(2 * n, n) = gates.segment(2 * n, n).array().tanh().matrix();
    gates.tail(n) = gates.tail(n).unaryExpr([](double v) { return sigmoid(v); });
    Matrix out(2 * n, 1);
    auto c = out.bottomRows(n);
    c = gates.segment(n, n).cwiseProduct(prev.c.value()) + gates.head(n).cwiseProduct(gates.segment(2 * n, n));
    const Vector tanh_c = c.array().tanh().matrix();
    out.topRows(n) = gates.tail(n).cwiseProduct(tanh_c);

    Var w = tape.param(weight);
    Var b = tape.param(bias);
    Var joint = tape.record(
        std::move(out), {x, prev.h, prev.c, w, b},
        [x, h_prev = prev.h, c_prev = prev.c, w, b, n, in, gates = std::move(gates), tanh_c,
         input_state = std::move(input_state)](Tape& t, const Matrix& g) {
          const auto i_gate = gates.head(n).array();
          const auto f_gate = gates.segment(n, n).array();
          const auto cand = gates.segment(2 * n, n).array();
          const auto o_gate = gates.tail(n).array();
          const auto dh = g.topRows(n).array();
          const Eigen::ArrayXd dc = g.bottomRows(n).array() + dh * o_gate * (1.0 - tanh_c.array().square());
          Vector dz(4 * n);
          dz.head(n) = (dc * cand * i_gate * (1.0 - i_gate)).matrix();
          dz.segment(n, n) = (dc * t.value(c_prev.id()).array() * f_gate * (1.0 - f_gate)).matrix();
          dz.segment(2 * n, n) = (dc * i_gate * (1.0 - cand.square())).matrix();
          dz.tail(n) = (dh * tanh_c.array() * o_gate * (1.0 - o_gate)).matrix();
          if (t.needs_grad(w)) t.accumulate(w, dz * input_state.transpose());
          t.accumulate(b, dz);
          if (t.needs_grad(x) || t.needs_grad(h_prev)) {
            const Vector d_input = t.value(w.id()).transpose() * dz;
            if (t.needs_grad(x)) t.accumulate(x, d_input.head(in));
            if (t.needs_grad(h_prev)) t.accumulate(h_prev, d_input.tail(n));
          }
          if (t.needs_grad(c_prev)) t.accumulate(c_prev, (dc * f_gate).matrix());
        });
    return {slice(joint, 0, n), slice(joint, n, n)};
  }

  // Runs the sequence and returns every state, first to last.
  std::vector<State> run(Tape& tape, const std::vector<Var>& inputs) const {
    std::vector<State> states;
    states.reserve(inputs.size());
    State state = initial(tape);
    for (const auto& x : inputs) {
      state = step(tape, x, state);
      states.push_back(state);
    }
    return states;
  }

  void collect(ParameterList& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  Parameter weight;
  Parameter bias;
};

}  // namespace sarcasm::nn
