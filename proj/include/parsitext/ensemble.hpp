#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/models/common.hpp"
#include "parsitext/models/lda.hpp"
#include "parsitext/models/linear.hpp"
#include "parsitext/models/naive_bayes.hpp"
#include "parsitext/models/tree.hpp"
#include "parsitext/parallel.hpp"
#include "parsitext/random.hpp"

namespace parsitext {

enum class LearnerKind { Svm, Logistic, Mnb, Gnb, Forest, Lda, Stump, Voting, Pasting, AdaBoost };

inline std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::Svm: return "svm";
    case LearnerKind::Logistic: return "logistic";
    case LearnerKind::Mnb: return "mnb";
    case LearnerKind::Gnb: return "gnb";
    case LearnerKind::Forest: return "forest";
    case LearnerKind::Lda: return "lda";
    case LearnerKind::Stump: return "stump";
    case LearnerKind::Voting: return "voting";
    case LearnerKind::Pasting: return "pasting";
    case LearnerKind::AdaBoost: return "adaboost";
  }
  return "?";
}

inline LearnerKind learner_kind_from_string(std::string_view s) {
  for (auto k : {LearnerKind::Svm, LearnerKind::Logistic, LearnerKind::Mnb, LearnerKind::Gnb, LearnerKind::Forest,
                 LearnerKind::Lda, LearnerKind::Stump, LearnerKind::Voting, LearnerKind::Pasting,
                 LearnerKind::AdaBoost}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown learner '" + std::string(s) + "'");
}

/// What to train. Only the fields of the selected kind are read.
struct LearnerSpec {
  LearnerKind kind = LearnerKind::Svm;
  // svm, logistic
  double l2_lambda = 1e-4;
  std::size_t epochs = 50;
  double eta0 = 0.1;
  // mnb, gnb
  double alpha = 1.0;
  /// mnb: shift negative columns instead of rejecting them.
  bool shift_negative = false;
  double var_floor = 1e-9;
  // forest
  std::size_t n_trees = 100;
  int max_depth = -1;
  std::size_t max_features = 0;
  bool bootstrap = true;
  // lda
  double ridge = 1e-6;
  /// Voting roster, or the single pasting base learner. Empty selects the defaults.
  std::vector<LearnerSpec> members;
  // pasting
  std::size_t n_estimators = 10;
  std::size_t sample_size = 200;
  // adaboost
  std::size_t n_rounds = 100;

  static LearnerSpec of(LearnerKind k) {
    LearnerSpec s;
    s.kind = k;
    return s;
  }
};

/// SVM, logistic regression, random forest, Gaussian NB, multinomial NB.
/// The MNB member shifts negative inputs so the roster also runs on PCA scores.
inline std::vector<LearnerSpec> default_voting_roster() {
  LearnerSpec mnb = LearnerSpec::of(LearnerKind::Mnb);
  mnb.shift_negative = true;
  return {LearnerSpec::of(LearnerKind::Svm), LearnerSpec::of(LearnerKind::Logistic),
          LearnerSpec::of(LearnerKind::Forest), LearnerSpec::of(LearnerKind::Gnb), mnb};
}

struct TrainedModel;

enum class EnsembleKind { Voting, Pasting, AdaBoost };

struct EnsembleModel {
  EnsembleKind kind = EnsembleKind::Voting;
  std::vector<TrainedModel> members;
  /// AdaBoost alphas; 1.0 for voting and pasting.
  std::vector<double> member_weights;
  /// Pasting: the sorted training rows each member saw.
  std::vector<std::vector<std::size_t>> sample_indices;
  /// AdaBoost: weighted error of each accepted stump.
  std::vector<double> round_errors;
  std::size_t sample_size = 0;
  double threshold = 0.5;
};

struct TrainedModel {
  LearnerKind kind = LearnerKind::Svm;
  std::variant<LinearModel, NaiveBayesModel, TreeModel, LdaModel, EnsembleModel> model;
};

Vector positive_proba(const TrainedModel& m, const Matrix& X);

namespace detail {

inline Vector ensemble_scores(const EnsembleModel& e, const Matrix& X) {
  Vector total = Vector::Zero(X.rows());
  if (e.kind == EnsembleKind::AdaBoost) {
    for (std::size_t i = 0; i < e.members.size(); ++i) {
      total += e.member_weights[i] * std::get<TreeModel>(e.members[i].model).stump_sign(X);
    }
    return total;
  }
  for (const auto& m : e.members) total += positive_proba(m, X);
  return total / static_cast<double>(e.members.size());
}

}  // namespace detail

/// The values that `threshold(m)` applies to. Higher means more positive.
inline Vector scores(const TrainedModel& m, const Matrix& X) {
  return std::visit(
      [&](const auto& model) -> Vector {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, EnsembleModel>) {
          return detail::ensemble_scores(model, X);
        } else {
          return model.scores(X);
        }
      },
      m.model);
}

/// P(class 1). Hinge margins and AdaBoost sums are squashed into [0, 1].
inline Vector positive_proba(const TrainedModel& m, const Matrix& X) {
  return std::visit(
      [&](const auto& model) -> Vector {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, EnsembleModel>) {
          Vector s = detail::ensemble_scores(model, X);
          if (model.kind == EnsembleKind::AdaBoost) {
            s = s.unaryExpr([](double f) { return detail::sigmoid(2.0 * f); });
          }
          return s;
        } else {
          return model.positive_proba(X);
        }
      },
      m.model);
}

/// N x 2 class probabilities; rows sum to 1.
inline Matrix predict_proba(const TrainedModel& m, const Matrix& X) {
  return detail::two_column(positive_proba(m, X));
}

inline double threshold(const TrainedModel& m) {
  return std::visit([](const auto& model) { return model.threshold; }, m.model);
}

inline void set_threshold(TrainedModel& m, double t) {
  std::visit([t](auto& model) { model.threshold = t; }, m.model);
}

/// Positive iff score > threshold, so ties fall to class 0.
inline Labels predict(const TrainedModel& m, const Matrix& X, double cut) {
  const Vector s = scores(m, X);
  Labels out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s(i) > cut ? 1 : 0;
  return out;
}

inline Labels predict(const TrainedModel& m, const Matrix& X) { return predict(m, X, threshold(m)); }

TrainedModel train(const LearnerSpec& spec, const Matrix& X, const Labels& y, std::uint64_t seed);

/// Unweighted mean of member probabilities.
inline TrainedModel train_voting(const std::vector<LearnerSpec>& roster, const Matrix& X, const Labels& y,
                                 std::uint64_t seed) {
  const auto specs = roster.empty() ? default_voting_roster() : roster;
  EnsembleModel e;
  e.kind = EnsembleKind::Voting;
  e.members.resize(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) { e.members[i] = train(specs[i], X, y, derive_seed(seed, i)); });
  e.member_weights.assign(specs.size(), 1.0);
  e.threshold = 0.5;
  return TrainedModel{LearnerKind::Voting, std::move(e)};
}

/// Members trained on sample_size distinct rows each, combined by soft vote.
inline TrainedModel train_pasting(const LearnerSpec& base, const Matrix& X, const Labels& y,
                                  std::size_t n_estimators, std::size_t sample_size, std::uint64_t seed) {
  detail::check_training_data(X, y, "train_pasting");
  const auto n = static_cast<std::size_t>(X.rows());
  if (sample_size == 0 || sample_size > n) {
    throw Error(ErrorKind::InvalidSampleSize,
                "sample size " + std::to_string(sample_size) + " must lie in [1, " + std::to_string(n) + "]");
  }
  if (n_estimators == 0) throw Error(ErrorKind::InvalidArgument, "train_pasting: n_estimators must be positive");
  EnsembleModel e;
  e.kind = EnsembleKind::Pasting;
  e.sample_size = sample_size;
  e.members.resize(n_estimators);
  e.sample_indices.resize(n_estimators);
  for (std::size_t i = 0; i < n_estimators; ++i) {
    Rng rng(derive_seed(seed, 2 * i));
    auto rows = rng.sample_without_replacement(n, sample_size);
    std::sort(rows.begin(), rows.end());
    e.sample_indices[i] = std::move(rows);
  }
  parallel_for(n_estimators, [&](std::size_t i) {
    const auto& rows = e.sample_indices[i];
    e.members[i] = train(base, take_rows(X, rows), take(y, rows), derive_seed(seed, 2 * i + 1));
  });
  e.member_weights.assign(n_estimators, 1.0);
  e.threshold = 0.5;
  return TrainedModel{LearnerKind::Pasting, std::move(e)};
}

/// Per-round diagnostics of AdaBoost training.
struct AdaBoostTrace {
  std::vector<double> errors;
  std::vector<double> weight_sums;
  std::vector<double> training_errors;
  /// Running product of 2 sqrt(eps (1 - eps)).
  std::vector<double> bounds;
};

/// Discrete AdaBoost over stumps with labels mapped to -1/+1. Stops early once
/// a stump is perfect or no better than chance.
inline TrainedModel train_adaboost(const Matrix& X, const Labels& y, std::size_t n_rounds = 100,
                                   AdaBoostTrace* trace = nullptr) {
  detail::check_training_data(X, y, "train_adaboost");
  detail::require_both_classes(y, "train_adaboost");
  const auto n = static_cast<std::size_t>(X.rows());
  Vector sign(X.rows());
  for (std::size_t i = 0; i < n; ++i) sign(static_cast<Eigen::Index>(i)) = y[i] == 1 ? 1.0 : -1.0;
  Vector w = Vector::Constant(X.rows(), 1.0 / static_cast<double>(n));
  Vector F = Vector::Zero(X.rows());
  double bound = 1.0;

  EnsembleModel e;
  e.kind = EnsembleKind::AdaBoost;
  e.threshold = 0.0;
  for (std::size_t round = 0; round < n_rounds; ++round) {
    TreeModel stump = train_stump(X, y, w);
    const Vector h = stump.stump_sign(X);
    double eps = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      if (h(i) != sign(i)) eps += w(i);
    }
    if (eps >= 0.5) {
      if (round == 0) {
        throw Error(ErrorKind::DegenerateLabels, "train_adaboost: no stump beats chance on this data");
      }
      break;
    }
    const double clamped = std::max(eps, 1e-10);
    const double alpha = 0.5 * std::log((1.0 - clamped) / clamped);
    e.members.push_back(TrainedModel{LearnerKind::Stump, std::move(stump)});
    e.member_weights.push_back(alpha);
    e.round_errors.push_back(eps);
    F += alpha * h;

    if (eps > 0.0) {
      w = (w.array() * (-alpha * sign.array() * h.array()).exp()).matrix();
      w /= w.sum();
    }
    if (trace) {
      bound *= 2.0 * std::sqrt(eps * (1.0 - eps));
      std::size_t wrong = 0;
      for (Eigen::Index i = 0; i < F.size(); ++i) wrong += (F(i) > 0.0) != (sign(i) > 0.0);
      trace->errors.push_back(eps);
      trace->weight_sums.push_back(w.sum());
      trace->training_errors.push_back(static_cast<double>(wrong) / static_cast<double>(n));
      trace->bounds.push_back(bound);
    }
    if (eps == 0.0) break;
  }
  return TrainedModel{LearnerKind::AdaBoost, std::move(e)};
}

inline TrainedModel train(const LearnerSpec& spec, const Matrix& X, const Labels& y, std::uint64_t seed) {
  switch (spec.kind) {
    case LearnerKind::Svm:
    case LearnerKind::Logistic: {
      LinearParams p;
      p.loss = spec.kind == LearnerKind::Svm ? LinearLoss::Hinge : LinearLoss::Logistic;
      p.l2_lambda = spec.l2_lambda;
      p.epochs = spec.epochs;
      p.eta0 = spec.eta0;
      p.seed = seed;
      return TrainedModel{spec.kind, train_linear(X, y, p)};
    }
    case LearnerKind::Mnb:
      return TrainedModel{spec.kind, spec.shift_negative ? train_mnb_shifted(X, y, spec.alpha)
                                                         : train_mnb(X, y, spec.alpha)};
    case LearnerKind::Gnb:
      return TrainedModel{spec.kind, train_gnb(X, y, spec.var_floor)};
    case LearnerKind::Forest: {
      ForestParams p;
      p.n_trees = spec.n_trees;
      p.max_depth = spec.max_depth;
      p.max_features = spec.max_features;
      p.bootstrap = spec.bootstrap;
      p.seed = seed;
      return TrainedModel{spec.kind, train_random_forest(X, y, p)};
    }
    case LearnerKind::Lda:
      return TrainedModel{spec.kind, train_lda(X, y, spec.ridge)};
    case LearnerKind::Stump:
      return TrainedModel{spec.kind, train_stump(X, y)};
    case LearnerKind::Voting:
      return train_voting(spec.members, X, y, seed);
    case LearnerKind::Pasting: {
      const LearnerSpec base = spec.members.empty() ? LearnerSpec::of(LearnerKind::Voting) : spec.members.front();
      return train_pasting(base, X, y, spec.n_estimators, spec.sample_size, seed);
    }
    case LearnerKind::AdaBoost:
      return train_adaboost(X, y, spec.n_rounds);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown learner kind");
}

}  // namespace parsitext
