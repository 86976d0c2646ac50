#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "parsitext/features.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/models/tree.hpp"

namespace parsitext {

/// Keeps columns whose random-forest importance reaches the cutoff, which is
/// the mean importance unless given explicitly.
inline std::vector<bool> select_features_by_importance(const Matrix& X, const Labels& y,
                                                       std::optional<double> cutoff = std::nullopt,
                                                       const ForestParams& params = {}) {
  const TreeModel forest = train_random_forest(X, y, params);
  const auto& imp = forest.feature_importances;
  double bar = 0.0;
  if (cutoff) {
    bar = *cutoff;
  } else {
    for (double v : imp) bar += v;
    bar /= static_cast<double>(imp.size());
  }
  std::vector<bool> mask(imp.size());
  for (std::size_t j = 0; j < imp.size(); ++j) mask[j] = imp[j] >= bar - 1e-12;
  return mask;
}

inline Matrix apply_mask(const Matrix& X, const std::vector<bool>& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != X.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "mask length differs from column count");
  }
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) keep.push_back(static_cast<Eigen::Index>(j));
  }
  Matrix out(X.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(keep[k]);
  return out;
}

inline FeatureMatrix apply_mask(const FeatureMatrix& X, const std::vector<bool>& mask) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < mask.size() && j < X.feature_names.size(); ++j) {
    if (mask[j]) names.push_back(X.feature_names[j]);
  }
  const bool dropped = std::find(mask.begin(), mask.end(), false) != mask.end();
  // dropping TF-IDF columns breaks unit row norms
  const NormState state = X.state == NormState::Tfidf && dropped ? NormState::Reduced : X.state;
  return make_dense(apply_mask(X.dense(), mask), state, std::move(names));
}

}  // namespace parsitext
