#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <utility>
#include <vector>

#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/models/common.hpp"
#include "parsitext/random.hpp"

namespace parsitext {

enum class LinearLoss { Logistic, Hinge };

inline std::string_view to_string(LinearLoss l) { return l == LinearLoss::Logistic ? "logistic" : "hinge"; }

struct LinearParams {
  LinearLoss loss = LinearLoss::Hinge;
  double l2_lambda = 1e-4;
  std::size_t epochs = 50;
  double eta0 = 0.1;
  std::uint64_t seed = 0;
};

struct LinearModel {
  Vector weights;
  double bias = 0.0;
  LinearParams params;
  /// Probability cut for logistic, margin cut for hinge.
  double threshold = 0.0;
  /// Largest absolute training margin; maps hinge margins into [0, 1].
  double margin_scale = 1.0;
  /// Training objective after each epoch.
  std::vector<double> objective_history;

  Vector decision_function(const Matrix& X) const {
    detail::check_columns(X, weights.size(), "linear model");
    return (X * weights).array() + bias;
  }

  /// Values compared against `threshold`.
  Vector scores(const Matrix& X) const {
    if (params.loss == LinearLoss::Hinge) return decision_function(X);
    return decision_function(X).unaryExpr([](double s) { return detail::sigmoid(s); });
  }

  /// Hinge margins are rescaled linearly around 0.5, so this is only an approximate probability.
  Vector positive_proba(const Matrix& X) const {
    if (params.loss == LinearLoss::Logistic) return scores(X);
    const double scale = margin_scale;
    return decision_function(X).unaryExpr(
        [scale](double s) { return std::clamp(0.5 + s / (2.0 * scale), 0.0, 1.0); });
  }
};

namespace detail {

/// Derivative of the per-sample loss with respect to the score.
inline double loss_slope(LinearLoss loss, double score, int label) {
  if (loss == LinearLoss::Logistic) return sigmoid(score) - label;
  const double sign = label == 1 ? 1.0 : -1.0;
  return sign * score < 1.0 ? -sign : 0.0;
}

inline double sample_loss(LinearLoss loss, double score, int label) {
  const double sign = label == 1 ? 1.0 : -1.0;
  if (loss == LinearLoss::Logistic) return softplus(-sign * score);
  return std::max(0.0, 1.0 - sign * score);
}

}  // namespace detail

/// Mean loss plus lambda/2 * ||w||^2.
inline double linear_objective(const Matrix& X, const Labels& y, const Vector& w, double b, LinearLoss loss,
                               double l2_lambda) {
  const Vector s = (X * w).array() + b;
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) total += detail::sample_loss(loss, s(i), y[static_cast<std::size_t>(i)]);
  return total / static_cast<double>(s.size()) + 0.5 * l2_lambda * w.squaredNorm();
}

/// Gradient of the logistic objective with respect to (w, b).
inline std::pair<Vector, double> logistic_gradient(const Matrix& X, const Labels& y, const Vector& w, double b,
                                                   double l2_lambda) {
  const Vector s = (X * w).array() + b;
  Vector gw = Vector::Zero(w.size());
  double gb = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double g = detail::loss_slope(LinearLoss::Logistic, s(i), y[static_cast<std::size_t>(i)]);
    gw += g * X.row(i).transpose();
    gb += g;
  }
  const double n = static_cast<double>(s.size());
  return {gw / n + l2_lambda * w, gb / n};
}

/// SGD with step eta0 / (1 + lambda * t). The bias starts at the class prior
/// so that heavy regularization degrades to the majority class.
inline LinearModel train_linear(const Matrix& X, const Labels& y, const LinearParams& params = {}) {
  detail::check_training_data(X, y, "train_linear");
  detail::require_both_classes(y, "train_linear");
  if (!(params.l2_lambda >= 0.0) || !(params.eta0 > 0.0) || params.epochs == 0) {
    throw Error(ErrorKind::InvalidArgument, "train_linear: need lambda >= 0, eta0 > 0, epochs > 0");
  }
  const auto n = static_cast<std::size_t>(X.rows());
  const auto counts = detail::class_counts(y);
  const double prior = static_cast<double>(counts[1]) / static_cast<double>(n);

  LinearModel model;
  model.params = params;
  model.weights = Vector::Zero(X.cols());
  model.bias = params.loss == LinearLoss::Logistic ? std::log(prior / (1.0 - prior)) : 2.0 * prior - 1.0;
  model.threshold = params.loss == LinearLoss::Logistic ? 0.5 : 0.0;

  Rng rng(params.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double t = 0.0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const auto row = X.row(static_cast<Eigen::Index>(i));
      const double eta = params.eta0 / (1.0 + params.l2_lambda * t);
      const double g = detail::loss_slope(params.loss, row.dot(model.weights) + model.bias, y[i]);
      if (g != 0.0) {
        model.weights -= (eta * g) * row.transpose();
        model.bias -= eta * g;
      }
      // implicit (proximal) L2 step, stable for any eta * lambda
      model.weights /= 1.0 + eta * params.l2_lambda;
      t += 1.0;
    }
    model.objective_history.push_back(
        linear_objective(X, y, model.weights, model.bias, params.loss, params.l2_lambda));
  }
  if (!model.weights.allFinite() || !std::isfinite(model.bias)) {
    throw Error(ErrorKind::NonFiniteInput, "train_linear: weights diverged");
  }
  const double max_margin = model.decision_function(X).cwiseAbs().maxCoeff();
  model.margin_scale = max_margin > 0.0 ? max_margin : 1.0;
  return model;
}

}  // namespace parsitext
