#pragma once

#include <Eigen/Cholesky>

#include <array>
#include <cmath>

#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/models/common.hpp"

namespace parsitext {

/// Two-class Fisher discriminant.
struct LdaModel {
  std::array<Vector, 2> means;
  /// Pooled within-class scatter, without the ridge term.
  Matrix scatter;
  Vector w;
  double ridge = 1e-6;
  /// Cut on the projection w.x, halfway between the projected class means.
  double projection_threshold = 0.0;
  /// Pooled within-class standard deviation of the projection.
  double projected_std = 1.0;
  double threshold = 0.5;

  Vector projection(const Matrix& X) const {
    detail::check_columns(X, w.size(), "lda");
    return X * w;
  }

  /// Signed distance to the cut in units of the projected std.
  Vector decision_function(const Matrix& X) const {
    return (projection(X).array() - projection_threshold) / projected_std;
  }

  Vector positive_proba(const Matrix& X) const {
    return decision_function(X).unaryExpr([](double z) { return detail::sigmoid(z); });
  }

  Vector scores(const Matrix& X) const { return positive_proba(X); }

  /// Between-class over within-class variance of the projection onto `direction`.
  double fisher_criterion(const Vector& direction) const {
    const double between = direction.dot(means[1] - means[0]);
    return between * between / direction.dot(scatter * direction);
  }
};

/// w = (S_W + ridge I)^-1 (mu1 - mu0).
inline LdaModel train_lda(const Matrix& X, const Labels& y, double ridge = 1e-6) {
  detail::check_training_data(X, y, "train_lda");
  const auto counts = detail::class_counts(y);
  if (counts[0] < 2 || counts[1] < 2) {
    throw Error(ErrorKind::InsufficientData, "train_lda: each class needs at least 2 samples");
  }
  if (!(ridge >= 0.0)) throw Error(ErrorKind::InvalidArgument, "train_lda: ridge must be non-negative");

  LdaModel model;
  model.ridge = ridge;
  const Eigen::Index d = X.cols();
  for (int c = 0; c < 2; ++c) model.means[static_cast<std::size_t>(c)] = Vector::Zero(d);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    model.means[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])] += X.row(r).transpose();
  }
  for (int c = 0; c < 2; ++c) {
    model.means[static_cast<std::size_t>(c)] /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  Matrix centered(X.rows(), d);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    centered.row(r) = X.row(r) - model.means[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])].transpose();
  }
  model.scatter = centered.transpose() * centered;
  const Matrix regularized = model.scatter + ridge * Matrix::Identity(d, d);
  model.w = regularized.ldlt().solve(model.means[1] - model.means[0]);
  if (!model.w.allFinite()) {
    throw Error(ErrorKind::InsufficientData, "train_lda: scatter is singular; use a positive ridge");
  }
  model.projection_threshold = 0.5 * (model.w.dot(model.means[0]) + model.w.dot(model.means[1]));
  const double dof = static_cast<double>(X.rows() - 2);
  const double var = (centered * model.w).squaredNorm() / dof;
  model.projected_std = var > 0.0 ? std::sqrt(var) : 1.0;
  return model;
}

}  // namespace parsitext
