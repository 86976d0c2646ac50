#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "parsitext/error.hpp"
#include "parsitext/features.hpp"
#include "parsitext/matrix.hpp"

namespace parsitext {

struct PcaModel {
  Vector mean;
  /// k x d, orthonormal rows.
  Matrix components;
  std::vector<double> explained_variance;
  std::vector<double> explained_variance_ratio;
  double target_ratio = 0.99;

  Eigen::Index k() const { return components.rows(); }

  double retained_ratio() const {
    double s = 0.0;
    for (double r : explained_variance_ratio) s += r;
    return s;
  }
};

/// Keeps the smallest number of leading components whose variance ratios reach
/// target_ratio. Sparse input is densified after centering.
inline PcaModel pca_fit(const Matrix& X, double target_ratio = 0.99) {
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "target ratio must lie in (0, 1]");
  }
  const Eigen::Index n = X.rows(), d = X.cols();
  if (n < 2) throw Error(ErrorKind::InsufficientData, "PCA needs at least 2 rows");
  if (d < 1) throw Error(ErrorKind::InsufficientData, "PCA needs at least 1 column");
  if (!X.allFinite()) throw Error(ErrorKind::NonFiniteInput, "PCA input contains NaN or infinity");

  PcaModel model;
  model.target_ratio = target_ratio;
  model.mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - model.mean.transpose();
  const double dof = static_cast<double>(n - 1);

  // Eigen-decompose the smaller of the covariance and the Gram matrix.
  const bool gram = n < d;
  const Eigen::MatrixXd small = gram ? Eigen::MatrixXd(centered * centered.transpose() / dof)
                                     : Eigen::MatrixXd(centered.transpose() * centered / dof);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(small);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "eigen-decomposition failed");

  const Eigen::Index m = small.rows();
  const double total = small.trace();
  if (!(total > 0.0)) throw Error(ErrorKind::InsufficientData, "data has zero variance");
  const double lambda_max = std::max(solver.eigenvalues()(m - 1), 0.0);

  std::vector<Eigen::VectorXd> chosen;
  double cumulative = 0.0;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    const double lambda = solver.eigenvalues()(i);
    if (lambda <= lambda_max * 1e-12) break;
    Eigen::VectorXd dir;
    if (gram) {
      dir = centered.transpose() * solver.eigenvectors().col(i);
      dir /= dir.norm();
    } else {
      dir = solver.eigenvectors().col(i);
    }
    Eigen::Index arg;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0) dir = -dir;
    chosen.push_back(std::move(dir));
    model.explained_variance.push_back(lambda);
    model.explained_variance_ratio.push_back(lambda / total);
    cumulative += lambda / total;
    if (cumulative >= target_ratio) break;
  }

  model.components.resize(static_cast<Eigen::Index>(chosen.size()), d);
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    model.components.row(static_cast<Eigen::Index>(i)) = chosen[i].transpose();
  }
  return model;
}

inline PcaModel pca_fit(const FeatureMatrix& X, double target_ratio = 0.99) {
  return pca_fit(X.dense(), target_ratio);
}

inline Matrix pca_transform(const Matrix& X, const PcaModel& model) {
  if (X.cols() != model.mean.size()) {
    throw Error(ErrorKind::ShapeMismatch, "PCA expects " + std::to_string(model.mean.size()) + " columns, got " +
                                              std::to_string(X.cols()));
  }
  return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

inline FeatureMatrix pca_transform(const FeatureMatrix& X, const PcaModel& model) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < model.k(); ++i) names.push_back("pc" + std::to_string(i));
  return make_dense(pca_transform(X.dense(), model), NormState::Reduced, std::move(names));
}

inline Matrix pca_reconstruct(const Matrix& Z, const PcaModel& model) {
  return (Z * model.components).rowwise() + model.mean.transpose();
}

}  // namespace parsitext
