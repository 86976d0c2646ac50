#pragma once

#include <array>
#include <cmath>
#include <string_view>

#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/models/common.hpp"

namespace parsitext {

enum class NbVariant { Multinomial, Gaussian };

inline std::string_view to_string(NbVariant v) { return v == NbVariant::Multinomial ? "multinomial" : "gaussian"; }

struct NaiveBayesModel {
  NbVariant variant = NbVariant::Multinomial;
  std::array<double, 2> class_log_prior{0.0, 0.0};
  /// Multinomial: 2 x d log conditionals. Gaussian: 2 x d means and variances.
  Matrix feature_log_prob;
  Matrix means;
  Matrix variances;
  /// Multinomial only: subtracted from inputs (then clamped at 0) when the
  /// model was trained on shifted features. Empty means no shift.
  Vector feature_offset;
  double alpha = 1.0;
  double var_floor = 1e-9;
  double threshold = 0.5;

  Eigen::Index n_features() const {
    return variant == NbVariant::Multinomial ? feature_log_prob.cols() : means.cols();
  }

  /// N x 2 unnormalized log posteriors.
  Matrix joint_log_likelihood(const Matrix& X) const {
    detail::check_columns(X, n_features(), "naive bayes");
    Matrix jll(X.rows(), 2);
    if (variant == NbVariant::Multinomial) {
      if (feature_offset.size() > 0) {
        jll = (X.rowwise() - feature_offset.transpose()).cwiseMax(0.0) * feature_log_prob.transpose();
      } else {
        if ((X.array() < 0.0).any()) throw Error(ErrorKind::NegativeFeature, "multinomial NB needs non-negative features");
        jll = X * feature_log_prob.transpose();
      }
    } else {
      constexpr double kTwoPi = 6.283185307179586476925286766559;
      for (int c = 0; c < 2; ++c) {
        const double log_norm = -0.5 * (kTwoPi * variances.row(c).array()).log().sum();
        const auto inv_var = variances.row(c).array().inverse();
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
          jll(r, c) = log_norm - 0.5 * ((X.row(r).array() - means.row(c).array()).square() * inv_var).sum();
        }
      }
    }
    jll.col(0).array() += class_log_prior[0];
    jll.col(1).array() += class_log_prior[1];
    return jll;
  }

  /// Normalized posteriors; rows sum to 1.
  Matrix proba(const Matrix& X) const {
    Matrix jll = joint_log_likelihood(X);
    for (Eigen::Index r = 0; r < jll.rows(); ++r) {
      const double m = jll.row(r).maxCoeff();
      const double a = std::exp(jll(r, 0) - m), b = std::exp(jll(r, 1) - m);
      jll(r, 0) = a / (a + b);
      jll(r, 1) = b / (a + b);
    }
    return jll;
  }

  Vector positive_proba(const Matrix& X) const { return proba(X).col(1); }
  Vector scores(const Matrix& X) const { return positive_proba(X); }
};

namespace detail {

inline std::array<double, 2> log_priors(const Labels& y) {
  const auto counts = class_counts(y);
  const double n = static_cast<double>(y.size());
  return {std::log(static_cast<double>(counts[0]) / n), std::log(static_cast<double>(counts[1]) / n)};
}

}  // namespace detail

/// Multinomial NB with additive smoothing on per-class feature totals.
inline NaiveBayesModel train_mnb(const Matrix& X, const Labels& y, double alpha = 1.0) {
  detail::check_training_data(X, y, "train_mnb");
  detail::require_both_classes(y, "train_mnb");
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "train_mnb: alpha must be positive");
  if ((X.array() < 0.0).any()) throw Error(ErrorKind::NegativeFeature, "train_mnb: features must be non-negative");

  NaiveBayesModel model;
  model.variant = NbVariant::Multinomial;
  model.alpha = alpha;
  model.class_log_prior = detail::log_priors(y);
  Matrix totals = Matrix::Zero(2, X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) totals.row(y[static_cast<std::size_t>(r)]) += X.row(r);
  model.feature_log_prob.resize(2, X.cols());
  const double d = static_cast<double>(X.cols());
  for (int c = 0; c < 2; ++c) {
    const double denom = totals.row(c).sum() + alpha * d;
    model.feature_log_prob.row(c) = ((totals.row(c).array() + alpha) / denom).log().matrix();
  }
  return model;
}

/// Multinomial NB on X minus its per-column minimum (where negative), for dense
/// inputs such as PCA scores.
inline NaiveBayesModel train_mnb_shifted(const Matrix& X, const Labels& y, double alpha = 1.0) {
  detail::check_training_data(X, y, "train_mnb");
  const Vector offset = X.colwise().minCoeff().transpose().cwiseMin(0.0);
  NaiveBayesModel model = train_mnb(X.rowwise() - offset.transpose(), y, alpha);
  model.feature_offset = offset;
  return model;
}

/// Gaussian NB with per-class population variances, floored at var_floor.
inline NaiveBayesModel train_gnb(const Matrix& X, const Labels& y, double var_floor = 1e-9) {
  detail::check_training_data(X, y, "train_gnb");
  detail::require_both_classes(y, "train_gnb");
  if (!(var_floor > 0.0)) throw Error(ErrorKind::InvalidArgument, "train_gnb: variance floor must be positive");

  NaiveBayesModel model;
  model.variant = NbVariant::Gaussian;
  model.var_floor = var_floor;
  model.class_log_prior = detail::log_priors(y);
  const auto counts = detail::class_counts(y);
  model.means = Matrix::Zero(2, X.cols());
  model.variances = Matrix::Zero(2, X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) model.means.row(y[static_cast<std::size_t>(r)]) += X.row(r);
  for (int c = 0; c < 2; ++c) model.means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const int c = y[static_cast<std::size_t>(r)];
    model.variances.row(c).array() += (X.row(r) - model.means.row(c)).array().square();
  }
  for (int c = 0; c < 2; ++c) {
    model.variances.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    model.variances.row(c) = model.variances.row(c).cwiseMax(var_floor);
  }
  return model;
}

}  // namespace parsitext
