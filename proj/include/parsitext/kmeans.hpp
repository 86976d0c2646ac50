#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "parsitext/error.hpp"
#include "parsitext/features.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/random.hpp"

namespace parsitext {

struct KMeansModel {
  /// k x d
  Matrix centers;
  double inertia = 0.0;
  std::size_t iterations = 0;
  /// Inertia after each assignment step, ending with the final assignment.
  std::vector<double> inertia_history;

  Eigen::Index k() const { return centers.rows(); }
};

struct KMeansParams {
  std::size_t max_iter = 300;
  double tol = 1e-6;
};

/// Nearest center for each row; ties go to the lowest center index.
inline std::vector<std::size_t> kmeans_assign(const Matrix& X, const Matrix& centers, double* inertia = nullptr) {
  std::vector<std::size_t> labels(static_cast<std::size_t>(X.rows()));
  double total = 0.0;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d2 = (X.row(r) - centers.row(c)).squaredNorm();
      if (d2 < best) {
        best = d2;
        arg = static_cast<std::size_t>(c);
      }
    }
    labels[static_cast<std::size_t>(r)] = arg;
    total += best;
  }
  if (inertia) *inertia = total;
  return labels;
}

inline std::vector<std::size_t> kmeans_assign(const Matrix& X, const KMeansModel& model) {
  return kmeans_assign(X, model.centers);
}

namespace detail {

inline Matrix kmeans_plus_plus(const Matrix& X, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(X.rows());
  Matrix centers(static_cast<Eigen::Index>(k), X.cols());
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  centers.row(0) = X.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (X.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();

  for (std::size_t c = 1; c < k; ++c) {
    double sum = 0.0;
    for (double v : d2) sum += v;
    std::size_t pick = n;
    if (sum > 0.0) {
      double u = rng.uniform() * sum;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        if (u < d2[i]) break;
        u -= d2[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    centers.row(static_cast<Eigen::Index>(c)) = X.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (X.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
  }
  return centers;
}

}  // namespace detail

/// Lloyd iterations from a k-means++ start. A cluster that loses all its points
/// keeps its previous center.
inline KMeansModel kmeans_fit(const Matrix& X, std::size_t k, std::uint64_t seed, KMeansParams params = {}) {
  if (k < 1 || k > static_cast<std::size_t>(X.rows())) {
    throw Error(ErrorKind::InvalidK, "k=" + std::to_string(k) + " must lie in [1, " + std::to_string(X.rows()) + "]");
  }
  if (!X.allFinite()) throw Error(ErrorKind::NonFiniteInput, "KMeans input contains NaN or infinity");
  Rng rng(seed);
  KMeansModel model;
  model.centers = detail::kmeans_plus_plus(X, k, rng);

  for (std::size_t it = 0; it < params.max_iter; ++it) {
    double inertia = 0.0;
    const auto labels = kmeans_assign(X, model.centers, &inertia);
    model.inertia_history.push_back(inertia);

    Matrix sums = Matrix::Zero(model.centers.rows(), X.cols());
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      sums.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)])) += X.row(r);
      ++counts[labels[static_cast<std::size_t>(r)]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const auto ci = static_cast<Eigen::Index>(c);
      Eigen::RowVectorXd next = sums.row(ci) / static_cast<double>(counts[c]);
      shift = std::max(shift, (next - model.centers.row(ci)).norm());
      model.centers.row(ci) = next;
    }
    model.iterations = it + 1;
    if (shift < params.tol) break;
  }
  kmeans_assign(X, model.centers, &model.inertia);
  model.inertia_history.push_back(model.inertia);
  return model;
}

inline FeatureMatrix cluster_distance_features(const Matrix& X, const KMeansModel& model) {
  if (X.cols() != model.centers.cols()) throw Error(ErrorKind::ShapeMismatch, "dimension differs from centers");
  Matrix out(X.rows(), model.k());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.k(); ++c) out(r, c) = (X.row(r) - model.centers.row(c)).norm();
  }
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < model.k(); ++c) names.push_back("dist" + std::to_string(c));
  return make_dense(std::move(out), NormState::Reduced, std::move(names));
}

inline FeatureMatrix cluster_center_features(const Matrix& X, const KMeansModel& model) {
  if (X.cols() != model.centers.cols()) throw Error(ErrorKind::ShapeMismatch, "dimension differs from centers");
  const auto labels = kmeans_assign(X, model);
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    out.row(r) = model.centers.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)]));
  }
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < X.cols(); ++c) names.push_back("center" + std::to_string(c));
  return make_dense(std::move(out), NormState::Reduced, std::move(names));
}

inline FeatureMatrix cluster_distance_features(const FeatureMatrix& X, const KMeansModel& model) {
  return cluster_distance_features(X.dense(), model);
}

inline FeatureMatrix cluster_center_features(const FeatureMatrix& X, const KMeansModel& model) {
  return cluster_center_features(X.dense(), model);
}

/// Mean silhouette coefficient of a clustering; 0 when k < 2.
inline double silhouette_score(const Matrix& X, const std::vector<std::size_t>& labels, std::size_t k) {
  if (k < 2) return 0.0;
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[labels[j]] += (X.row(static_cast<Eigen::Index>(i)) - X.row(static_cast<Eigen::Index>(j))).norm();
    }
    const std::size_t own = labels[i];
    if (sizes[own] <= 1) continue;
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    if (std::isfinite(b) && std::max(a, b) > 0.0) total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

/// Fits each candidate k and returns the one with the best silhouette (ties: smallest k).
inline std::size_t choose_k_by_silhouette(const Matrix& X, const std::vector<std::size_t>& candidates,
                                          std::uint64_t seed) {
  std::size_t best_k = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (auto k : candidates) {
    const auto model = kmeans_fit(X, k, seed);
    const double s = silhouette_score(X, kmeans_assign(X, model), k);
    if (s > best) {
      best = s;
      best_k = k;
    }
  }
  if (best_k == 0) throw Error(ErrorKind::InvalidK, "no candidate cluster count");
  return best_k;
}

}  // namespace parsitext
