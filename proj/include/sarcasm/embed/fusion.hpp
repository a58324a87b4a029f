#pragma once

// Two-view regularized canonical correlation analysis used to fuse the
// document view with the personality view.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "json.hpp"
#include "sarcasm/common/error.hpp"
#include "sarcasm/nn/checkpoint.hpp"

namespace sarcasm::embed {

struct FusionModel {
  Eigen::VectorXd mean_v;
  Eigen::VectorXd mean_p;
  Eigen::MatrixXd proj_v;  // d_v x d_e
  Eigen::MatrixXd proj_p;  // d_p x d_e
  Eigen::VectorXd correlations;  // canonical correlations, descending
  double epsilon = 1e-3;
  bool fitted = false;

  int dim() const { return static_cast<int>(proj_v.cols()); }

  Eigen::VectorXd project_v(const Eigen::VectorXd& v) const {
    require_fitted();
    return proj_v.transpose() * (v - mean_v);
  }

  Eigen::VectorXd project_p(const Eigen::VectorXd& p) const {
    require_fitted();
    return proj_p.transpose() * (p - mean_p);
  }

  // Mean of the two projected views.
  Eigen::VectorXd fuse(const Eigen::VectorXd& v, const Eigen::VectorXd& p) const {
    if (v.size() != mean_v.size() || p.size() != mean_p.size()) throw DomainError("fuse: view dimension mismatch");
    return 0.5 * (project_v(v) + project_p(p));
  }

  nlohmann::json to_json() const {
    return {{"mean_v", nn::matrix_to_json(mean_v)}, {"mean_p", nn::matrix_to_json(mean_p)},
            {"proj_v", nn::matrix_to_json(proj_v)}, {"proj_p", nn::matrix_to_json(proj_p)},
            {"correlations", nn::matrix_to_json(correlations)}, {"epsilon", epsilon}};
  }

  static FusionModel from_json(const nlohmann::json& j) {
    FusionModel m;
    m.mean_v = nn::matrix_from_json(j.at("mean_v"));
    m.mean_p = nn::matrix_from_json(j.at("mean_p"));
    m.proj_v = nn::matrix_from_json(j.at("proj_v"));
    m.proj_p = nn::matrix_from_json(j.at("proj_p"));
    m.correlations = nn::matrix_from_json(j.at("correlations"));
    m.epsilon = j.at("epsilon").get<double>();
    m.fitted = true;
    return m;
  }

 private:
  void require_fitted() const {
    if (!fitted) throw ConfigError("fusion model used before fit_fusion");
  }
};

namespace detail {

// (S + eps I)^(-1/2) for a symmetric positive semi-definite S.
inline Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& covariance, double epsilon) {
  const Eigen::MatrixXd reg = covariance + epsilon * Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reg);
  const Eigen::VectorXd values = solver.eigenvalues();
  if (values.minCoeff() <= 0.0) throw NumericError("fusion: regularized covariance is singular");
  return solver.eigenvectors() * values.cwiseSqrt().cwiseInverse().asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace detail

// Rows of `views_v` and `views_p` are paired samples. Each view is centered
// and whitened with (Sigma_ii + eps I)^(-1/2); the top-d_e singular pairs of
// the whitened cross-covariance give the canonical directions. Each pair is
// signed so the largest-magnitude entry of its document-side direction is
// positive.
inline FusionModel fit_fusion(const Eigen::MatrixXd& views_v, const Eigen::MatrixXd& views_p, int d_e,
                              double epsilon = 1e-3) {
  if (!(epsilon > 0.0)) throw NumericError("fit_fusion: epsilon must be > 0 (rank-deficient views are singular)");
  if (views_v.rows() != views_p.rows()) throw DomainError("fit_fusion: views have different sample counts");
  if (d_e < 1) throw ConfigError("fit_fusion: output dimension must be >= 1");
  if (views_v.rows() < d_e + 1) {
    throw DomainError("fit_fusion: need at least d_e + 1 = " + std::to_string(d_e + 1) + " samples, got " +
                      std::to_string(views_v.rows()));
  }
  if (d_e > std::min(views_v.cols(), views_p.cols())) {
    throw ConfigError("fit_fusion: d_e exceeds the smaller view dimension");
  }
  const auto n = static_cast<double>(views_v.rows());
  FusionModel model;
  model.epsilon = epsilon;
  model.mean_v = views_v.colwise().mean().transpose();
  model.mean_p = views_p.colwise().mean().transpose();
  const Eigen::MatrixXd centered_v = views_v.rowwise() - model.mean_v.transpose();
  const Eigen::MatrixXd centered_p = views_p.rowwise() - model.mean_p.transpose();
  const Eigen::MatrixXd cov_vv = centered_v.transpose() * centered_v / (n - 1.0);
  const Eigen::MatrixXd cov_pp = centered_p.transpose() * centered_p / (n - 1.0);
  const Eigen::MatrixXd cov_vp = centered_v.transpose() * centered_p / (n - 1.0);
  const Eigen::MatrixXd white_v = detail::inverse_sqrt(cov_vv, epsilon);
  const Eigen::MatrixXd white_p = detail::inverse_sqrt(cov_pp, epsilon);
  const Eigen::MatrixXd cross = white_v * cov_vp * white_p;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd u = svd.matrixU().leftCols(d_e);
  Eigen::MatrixXd v = svd.matrixV().leftCols(d_e);
  for (Eigen::Index k = 0; k < d_e; ++k) {
    Eigen::Index arg = 0;
    u.col(k).cwiseAbs().maxCoeff(&arg);
    if (u(arg, k) < 0) {
      u.col(k) *= -1.0;
      v.col(k) *= -1.0;
    }
  }
  model.proj_v = white_v * u;
  model.proj_p = white_p * v;
  model.correlations = svd.singularValues().head(d_e);
  model.fitted = true;
  return model;
}

}  // namespace sarcasm::embed
