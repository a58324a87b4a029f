#pragma once

#include <string>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/nn/layers.hpp"

namespace sarcasm::nn {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ConfigError("checkpoint matrix has inconsistent size");
  }
  return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

inline nlohmann::json parameters_to_json(const ParameterList& params) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto* p : params) out[p->name] = matrix_to_json(p->value);
  return out;
}

inline void parameters_from_json(const nlohmann::json& j, const ParameterList& params) {
  for (auto* p : params) {
    if (!j.contains(p->name)) throw ConfigError("checkpoint lacks parameter " + p->name);
    Matrix value = matrix_from_json(j.at(p->name));
    if (value.rows() != p->value.rows() || value.cols() != p->value.cols()) {
      throw ConfigError("checkpoint parameter " + p->name + " has the wrong shape");
    }
    p->value = std::move(value);
    p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
  }
}

}  // namespace sarcasm::nn
