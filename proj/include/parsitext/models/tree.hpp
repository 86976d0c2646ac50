#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string_view>
#include <utility>
#include <vector>

#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/models/common.hpp"
#include "parsitext/parallel.hpp"
#include "parsitext/random.hpp"

namespace parsitext {

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Class weight reaching this node.
  std::array<double, 2> counts{0.0, 0.0};

  bool is_leaf() const { return feature < 0; }
  int majority() const { return counts[1] > counts[0] ? 1 : 0; }
  double positive_fraction() const {
    const double total = counts[0] + counts[1];
    return total > 0.0 ? counts[1] / total : 0.5;
  }
};

/// Binary tree stored as a node array; rows with x[feature] <= threshold go left.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  template <class Row>
  const TreeNode& leaf(const Row& x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)];
  }

  int depth() const { return depth_from(0); }

 private:
  int depth_from(int i) const {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

enum class TreeKind { Forest, Stump };

inline std::string_view to_string(TreeKind k) { return k == TreeKind::Forest ? "forest" : "stump"; }

struct ForestParams {
  std::size_t n_trees = 100;
  /// Negative means unlimited.
  int max_depth = -1;
  /// Features tried per split; 0 means floor(sqrt(d)).
  std::size_t max_features = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  /// 0 means hardware concurrency.
  std::size_t n_threads = 0;
};

struct TreeModel {
  TreeKind kind = TreeKind::Forest;
  std::vector<DecisionTree> trees;
  Eigen::Index n_features = 0;
  int max_depth = -1;
  std::size_t max_features = 0;
  bool bootstrap = true;
  std::vector<double> feature_importances;
  double threshold = 0.5;

  /// Forest: fraction of trees voting positive. Stump: weighted positive fraction in the leaf.
  Vector positive_proba(const Matrix& X) const {
    detail::check_columns(X, n_features, "tree model");
    Vector p(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      const auto row = X.row(r);
      if (kind == TreeKind::Stump) {
        p(r) = trees.front().leaf(row).positive_fraction();
      } else {
        double votes = 0.0;
        for (const auto& t : trees) votes += t.leaf(row).majority();
        p(r) = votes / static_cast<double>(trees.size());
      }
    }
    return p;
  }

  Vector scores(const Matrix& X) const { return positive_proba(X); }

  /// Hard output of the stump's leaves, in {-1, +1}.
  Vector stump_sign(const Matrix& X) const {
    Vector h(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) h(r) = trees.front().leaf(X.row(r)).majority() == 1 ? 1.0 : -1.0;
    return h;
  }
};

namespace detail {

inline double gini_mass(double c0, double c1) {
  const double w = c0 + c1;
  return w > 0.0 ? w - (c0 * c0 + c1 * c1) / w : 0.0;
}

inline double midpoint(double lo, double hi) {
  const double m = lo + (hi - lo) / 2.0;
  return m < hi ? m : lo;
}

class CartBuilder {
 public:
  CartBuilder(const Matrix& X, const Labels& y, std::size_t max_features, int max_depth, Rng& rng)
      : X_(X), y_(y), max_features_(max_features), max_depth_(max_depth), rng_(rng),
        importance_(static_cast<std::size_t>(X.cols()), 0.0) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    total_ = static_cast<double>(rows.size());
    grow(rows, 0);
    return std::move(tree_);
  }

  const std::vector<double>& importance() const { return importance_; }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::array<double, 2> counts{0.0, 0.0};
    for (auto r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
    tree_.nodes[static_cast<std::size_t>(id)].counts = counts;

    const bool pure = counts[0] == 0.0 || counts[1] == 0.0;
    if (pure || rows.size() < 2 || (max_depth_ >= 0 && depth >= max_depth_)) return id;
    const Split split = best_split(rows);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (X_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    importance_[static_cast<std::size_t>(split.feature)] +=
        std::max(0.0, gini_mass(counts[0], counts[1]) - split.impurity) / total_;

    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Tries max_features random features; keeps drawing if none of them can split.
  Split best_split(const std::vector<std::size_t>& rows) {
    std::vector<int> features(static_cast<std::size_t>(X_.cols()));
    std::iota(features.begin(), features.end(), 0);
    rng_.shuffle(features);
    Split best;
    std::vector<std::pair<double, int>> values(rows.size());
    for (std::size_t tried = 0; tried < features.size(); ++tried) {
      if (tried >= max_features_ && best.feature >= 0) break;
      const int f = features[tried];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        values[i] = {X_(static_cast<Eigen::Index>(rows[i]), f), y_[rows[i]]};
      }
      std::sort(values.begin(), values.end());
      std::array<double, 2> left{0.0, 0.0}, total{0.0, 0.0};
      for (const auto& v : values) total[static_cast<std::size_t>(v.second)] += 1.0;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        left[static_cast<std::size_t>(values[i].second)] += 1.0;
        if (values[i].first == values[i + 1].first) continue;
        const double impurity = gini_mass(left[0], left[1]) + gini_mass(total[0] - left[0], total[1] - left[1]);
        if (best.feature < 0 || impurity < best.impurity) {
          best = {f, midpoint(values[i].first, values[i + 1].first), impurity};
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  const Labels& y_;
  std::size_t max_features_;
  int max_depth_;
  Rng& rng_;
  std::vector<double> importance_;
  double total_ = 0.0;
  DecisionTree tree_;
};

inline std::vector<double> normalized_or_uniform(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > 0.0) {
    for (auto& x : v) x /= s;
  } else if (!v.empty()) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
  }
  return v;
}

}  // namespace detail

/// Gini CART trees on bootstrap samples. Each tree draws from its own seed, so
/// the result does not depend on the thread count.
inline TreeModel train_random_forest(const Matrix& X, const Labels& y, const ForestParams& params = {}) {
  detail::check_training_data(X, y, "train_random_forest");
  if (X.rows() < 2) throw Error(ErrorKind::InsufficientData, "train_random_forest: need at least 2 samples");
  detail::require_both_classes(y, "train_random_forest");
  if (params.n_trees == 0) throw Error(ErrorKind::InvalidArgument, "train_random_forest: n_trees must be positive");

  const auto d = static_cast<std::size_t>(X.cols());
  TreeModel model;
  model.kind = TreeKind::Forest;
  model.n_features = X.cols();
  model.max_depth = params.max_depth;
  model.bootstrap = params.bootstrap;
  model.max_features = params.max_features == 0
                           ? std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))))
                           : std::min(params.max_features, d);
  model.trees.resize(params.n_trees);
  std::vector<std::vector<double>> importances(params.n_trees);

  const auto n = static_cast<std::size_t>(X.rows());
  auto build_one = [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = rng.below(n);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    detail::CartBuilder builder(X, y, model.max_features, params.max_depth, rng);
    model.trees[t] = builder.build(std::move(rows));
    importances[t] = detail::normalized_or_uniform(builder.importance());
  };

  parallel_for(params.n_trees, build_one, params.n_threads);

  std::vector<double> total(d, 0.0);
  for (const auto& imp : importances) {
    for (std::size_t f = 0; f < d; ++f) total[f] += imp[f];
  }
  model.feature_importances = detail::normalized_or_uniform(std::move(total));
  return model;
}

/// Depth-1 tree minimizing weighted misclassification error over every
/// (feature, midpoint) pair. Ties keep the lowest feature, then the lowest
/// threshold. With one class present the stump is a single leaf.
inline TreeModel train_stump(const Matrix& X, const Labels& y, const Vector& weights) {
  detail::check_training_data(X, y, "train_stump");
  if (weights.size() != X.rows()) throw Error(ErrorKind::ShapeMismatch, "train_stump: one weight per row needed");
  if (!weights.allFinite() || (weights.array() < 0.0).any() || !(weights.sum() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "train_stump: weights must be non-negative with a positive sum");
  }
  std::array<double, 2> total{0.0, 0.0};
  for (Eigen::Index r = 0; r < X.rows(); ++r) total[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])] += weights(r);

  TreeModel model;
  model.kind = TreeKind::Stump;
  model.n_features = X.cols();
  model.max_depth = 1;
  model.max_features = static_cast<std::size_t>(X.cols());
  model.bootstrap = false;
  DecisionTree tree;
  tree.nodes.emplace_back();
  tree.nodes[0].counts = total;

  auto leaf_error = [](double c0, double c1) { return c1 > c0 ? c0 : c1; };
  const double tol = 1e-12 * (total[0] + total[1]);
  double best_error = std::numeric_limits<double>::infinity();
  int best_feature = -1;
  double best_threshold = 0.0;
  std::array<double, 2> best_left{0.0, 0.0};

  const bool mixed = total[0] > 0.0 && total[1] > 0.0;
  std::vector<std::pair<double, Eigen::Index>> values(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index f = 0; mixed && f < X.cols(); ++f) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) values[static_cast<std::size_t>(r)] = {X(r, f), r};
    std::sort(values.begin(), values.end());
    std::array<double, 2> left{0.0, 0.0};
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const auto r = values[i].second;
      left[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])] += weights(r);
      if (values[i].first == values[i + 1].first) continue;
      const double error = leaf_error(left[0], left[1]) + leaf_error(total[0] - left[0], total[1] - left[1]);
      if (error < best_error - tol) {
        best_error = error;
        best_feature = static_cast<int>(f);
        best_threshold = detail::midpoint(values[i].first, values[i + 1].first);
        best_left = left;
      }
    }
  }
  if (best_feature >= 0) {
    tree.nodes[0].feature = best_feature;
    tree.nodes[0].threshold = best_threshold;
    tree.nodes[0].left = 1;
    tree.nodes[0].right = 2;
    TreeNode l, r;
    l.counts = best_left;
    r.counts = {total[0] - best_left[0], total[1] - best_left[1]};
    tree.nodes.push_back(l);
    tree.nodes.push_back(r);
  }
  model.trees.push_back(std::move(tree));
  model.feature_importances.assign(static_cast<std::size_t>(X.cols()), 0.0);
  if (best_feature >= 0) {
    model.feature_importances[static_cast<std::size_t>(best_feature)] = 1.0;
  } else {
    model.feature_importances = detail::normalized_or_uniform(std::move(model.feature_importances));
  }
  return model;
}

inline TreeModel train_stump(const Matrix& X, const Labels& y) {
  return train_stump(X, y, Vector::Constant(X.rows(), 1.0));
}

}  // namespace parsitext
