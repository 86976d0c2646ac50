#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "parsitext/ensemble.hpp"
#include "parsitext/eval.hpp"
#include "parsitext/random.hpp"

namespace pt = parsitext;
namespace fs = std::filesystem;

namespace {

template <class F>
void expect_error(pt::ErrorKind kind, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << pt::to_string(kind);
  } catch (const pt::Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

pt::Vector vec(std::initializer_list<double> v) {
  pt::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Counts concordant positive/negative pairs, ties worth one half.
double mann_whitney(const pt::Labels& y, const pt::Vector& s) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      const double a = s(static_cast<Eigen::Index>(i)), b = s(static_cast<Eigen::Index>(j));
      num += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    }
  }
  return num / pairs;
}

pt::Labels random_labels(pt::Rng& rng, std::size_t n) {
  pt::Labels y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(2));
  return y;
}

}  // namespace

TEST(Metrics, WorkedExample) {
  pt::ConfusionCounts c{3, 1, 4, 2};
  const auto m = pt::precision_recall_f1(c);
  EXPECT_DOUBLE_EQ(m.precision, 0.75);
  EXPECT_DOUBLE_EQ(m.recall, 0.6);
  EXPECT_NEAR(m.f1, 2.0 * 0.75 * 0.6 / 1.35, 1e-15);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
  EXPECT_FALSE(m.precision_degenerate || m.recall_degenerate || m.f1_degenerate);
}

TEST(Metrics, PerfectPredictions) {
  const pt::Labels y{1, 0, 1, 1, 0};
  const auto m = pt::precision_recall_f1(pt::confusion(y, y));
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.accuracy, 1.0);
}

TEST(Metrics, NoPositivePredictionsIsDegenerate) {
  const auto m = pt::precision_recall_f1(pt::confusion({1, 0, 1}, {0, 0, 0}));
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_TRUE(m.precision_degenerate);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_FALSE(m.recall_degenerate);
  EXPECT_TRUE(m.f1_degenerate);
}

TEST(Metrics, LengthMismatchAndNonBinary) {
  expect_error(pt::ErrorKind::ShapeMismatch, [] { pt::confusion({1, 0}, {1}); });
  expect_error(pt::ErrorKind::InvalidArgument, [] { pt::confusion({1, 2}, {1, 0}); });
}

TEST(Metrics, MatchBruteForceCounting) {
  pt::Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    const auto y = random_labels(rng, n), p = random_labels(rng, n);
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += y[i] && p[i];
      fp += !y[i] && p[i];
      fn += y[i] && !p[i];
      tn += !y[i] && !p[i];
    }
    const auto m = pt::precision_recall_f1(pt::confusion(y, p));
    EXPECT_EQ(m.precision, tp + fp > 0 ? tp / (tp + fp) : 0.0);
    EXPECT_EQ(m.recall, tp + fn > 0 ? tp / (tp + fn) : 0.0);
    EXPECT_EQ(m.accuracy, (tp + tn) / static_cast<double>(n));
    if (m.precision > 0 && m.recall > 0) {
      EXPECT_NEAR(1.0 / m.f1, (1.0 / m.precision + 1.0 / m.recall) / 2.0, 1e-12);
    }
  }
}

TEST(Roc, PerfectAndInvertedRankings) {
  const pt::Labels y{1, 1, 0, 0};
  EXPECT_EQ(pt::roc_auc(y, vec({0.9, 0.8, 0.3, 0.1})).auc, 1.0);
  EXPECT_EQ(pt::roc_auc(y, vec({0.1, 0.2, 0.8, 0.9})).auc, 0.0);
}

TEST(Roc, WorkedExample) {
  const pt::Labels y{1, 0, 1, 0};
  const auto s = vec({0.9, 0.8, 0.7, 0.1});
  const auto roc = pt::roc_auc(y, s);
  EXPECT_DOUBLE_EQ(roc.auc, 0.75);
  EXPECT_DOUBLE_EQ(mann_whitney(y, s), 0.75);
  ASSERT_EQ(roc.points.size(), 5u);
  EXPECT_TRUE(std::isinf(roc.points.front().threshold));
}

TEST(Roc, CurveShape) {
  pt::Rng rng(2);
  const auto y = pt::Labels{1, 0, 0, 1, 1, 0, 1, 0, 0, 1};
  pt::Vector s(10);
  for (int i = 0; i < 10; ++i) s(i) = std::round(rng.uniform() * 4.0);
  const auto roc = pt::roc_auc(y, s);
  EXPECT_EQ(roc.points.front().fpr, 0.0);
  EXPECT_EQ(roc.points.front().tpr, 0.0);
  EXPECT_EQ(roc.points.back().fpr, 1.0);
  EXPECT_EQ(roc.points.back().tpr, 1.0);
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    EXPECT_GE(roc.points[i].fpr, roc.points[i - 1].fpr);
    EXPECT_GE(roc.points[i].tpr, roc.points[i - 1].tpr);
    EXPECT_LT(roc.points[i].threshold, roc.points[i - 1].threshold);
  }
}

TEST(Roc, TrapezoidEqualsMannWhitney) {
  pt::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    auto y = random_labels(rng, n);
    y[0] = 1;
    y[1] = 0;
    pt::Vector s(static_cast<Eigen::Index>(n));
    const bool coarse = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s(static_cast<Eigen::Index>(i)) = coarse ? static_cast<double>(rng.below(5)) : rng.normal();
    }
    EXPECT_NEAR(pt::roc_auc(y, s).auc, mann_whitney(y, s), 1e-12) << "trial " << trial;
  }
}

TEST(Roc, SingleClassIsUndefined) {
  expect_error(pt::ErrorKind::UndefinedRoc, [] { pt::roc_auc({1, 1, 1}, vec({0.1, 0.5, 0.9})); });
  expect_error(pt::ErrorKind::ShapeMismatch, [] { pt::roc_auc({1, 0}, vec({0.1})); });
}

TEST(Folds, LeaveOneOut) {
  const pt::Labels y{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto folds = pt::stratified_folds(y, 10, 4);
  ASSERT_EQ(folds.size(), 10u);
  for (const auto& f : folds) EXPECT_EQ(f.size(), 1u);
}

TEST(Folds, PartitionAndStratification) {
  pt::Rng rng(5);
  for (std::size_t k : {2u, 3u, 5u, 10u}) {
    auto y = random_labels(rng, 97);
    const auto folds = pt::stratified_folds(y, k, 6);
    std::vector<int> seen(y.size(), 0);
    std::size_t lo = y.size(), hi = 0;
    const double ratio = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(y.size());
    for (const auto& f : folds) {
      for (auto r : f) ++seen[r];
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      const auto pos = static_cast<double>(std::count_if(f.begin(), f.end(), [&](std::size_t r) { return y[r] == 1; }));
      EXPECT_LE(std::abs(pos - ratio * static_cast<double>(f.size())), 1.0 + 1e-9);
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    EXPECT_LE(hi - lo, 1u);
  }
  expect_error(pt::ErrorKind::InvalidK, [] { pt::stratified_folds({0, 1, 0}, 4, 1); });
  expect_error(pt::ErrorKind::InvalidK, [] { pt::stratified_folds({0, 1, 0}, 1, 1); });
}

TEST(Folds, HoldoutCountsAndDeterminism) {
  pt::Labels y(16278, 0);
  for (std::size_t i = 0; i < 8139; ++i) y[i] = 1;
  const auto [train, test] = pt::stratified_holdout(y, 0.2, 7);
  EXPECT_EQ(test.size(), 3256u);
  EXPECT_EQ(train.size() + test.size(), y.size());
  EXPECT_EQ(pt::stratified_holdout(y, 0.2, 7).second, test);
  expect_error(pt::ErrorKind::InvalidFraction, [&] { pt::stratified_holdout(y, 0.0, 7); });
  expect_error(pt::ErrorKind::DegenerateLabels, [] { pt::stratified_holdout({1, 1, 1}, 0.5, 7); });
}

TEST(CrossValidate, ConstantLearnerScoresMajorityFraction) {
  pt::Rng rng(8);
  const auto y = random_labels(rng, 53);
  auto run = [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
    std::size_t ones = 0;
    for (auto r : train) ones += static_cast<std::size_t>(y[r]);
    const double constant = 2 * ones > train.size() ? 1.0 : 0.0;
    pt::Labels yt;
    for (auto r : test) yt.push_back(y[r]);
    return pt::evaluate_scores(yt, pt::Vector::Constant(static_cast<Eigen::Index>(test.size()), constant), 0.5);
  };
  const auto cv = pt::cross_validate(y, 5, 9, run);
  ASSERT_EQ(cv.per_fold.size(), 5u);
  for (std::size_t f = 0; f < 5; ++f) {
    std::size_t train_ones = 0, train_n = 0, test_match = 0;
    for (std::size_t g = 0; g < 5; ++g) {
      if (g == f) continue;
      for (auto r : cv.fold_indices[g]) train_ones += static_cast<std::size_t>(y[r]), ++train_n;
    }
    const int majority = 2 * train_ones > train_n ? 1 : 0;
    for (auto r : cv.fold_indices[f]) test_match += y[r] == majority;
    EXPECT_DOUBLE_EQ(cv.per_fold[f].metrics.accuracy,
                     static_cast<double>(test_match) / static_cast<double>(cv.fold_indices[f].size()));
  }
  double mean = 0.0;
  for (const auto& m : cv.per_fold) mean += m.metrics.accuracy;
  EXPECT_NEAR(cv.accuracy.mean, mean / 5.0, 1e-15);
  EXPECT_EQ(cv.auc.n, 5u);
  EXPECT_EQ(cv.auc.mean, 0.5);
}

TEST(CrossValidate, ThreadCountDoesNotChangeResults) {
  pt::Rng rng(10);
  const auto y = random_labels(rng, 40);
  pt::Vector s(40);
  for (int i = 0; i < 40; ++i) s(i) = rng.normal() + y[static_cast<std::size_t>(i)];
  auto run = [&](const std::vector<std::size_t>&, const std::vector<std::size_t>& test) {
    pt::Labels yt;
    pt::Vector st(static_cast<Eigen::Index>(test.size()));
    for (std::size_t i = 0; i < test.size(); ++i) yt.push_back(y[test[i]]), st(static_cast<Eigen::Index>(i)) = s(static_cast<Eigen::Index>(test[i]));
    return pt::evaluate_scores(yt, st, 0.5);
  };
  const auto a = pt::cross_validate(y, 4, 11, run, 1);
  const auto b = pt::cross_validate(y, 4, 11, run, 4);
  EXPECT_EQ(a.fold_indices, b.fold_indices);
  EXPECT_EQ(a.f1.mean, b.f1.mean);
  EXPECT_EQ(a.auc.mean, b.auc.mean);
  EXPECT_EQ(a.auc.std, b.auc.std);
}

namespace {

struct Noisy {
  pt::Matrix X;
  pt::Labels y;
};

// Label depends on the first coordinate, 15% flipped; the other 8 columns are noise.
Noisy noisy_fixture(std::uint64_t seed) {
  pt::Rng rng(seed);
  Noisy f;
  f.X.resize(100, 9);
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 9; ++j) f.X(i, j) = rng.normal();
    int label = f.X(i, 0) > 0 ? 1 : 0;
    if (rng.uniform() < 0.15) label = 1 - label;
    f.y.push_back(label);
  }
  return f;
}

pt::CurveRunner runner_for(const Noisy& f, const pt::LearnerSpec& spec) {
  return [&f, spec](const std::vector<std::size_t>& train, const std::vector<std::size_t>& val) {
    const auto model = pt::train(spec, pt::take_rows(f.X, train), pt::take(f.y, train), 3);
    auto f1 = [&](const std::vector<std::size_t>& rows) {
      const auto yr = pt::take(f.y, rows);
      return pt::precision_recall_f1(pt::confusion(yr, pt::predict(model, pt::take_rows(f.X, rows)))).f1;
    };
    return std::make_pair(f1(train), f1(val));
  };
}

}  // namespace

TEST(LearningCurve, FullFractionMatchesPlainEvaluation) {
  const auto f = noisy_fixture(12);
  const auto spec = pt::LearnerSpec::of(pt::LearnerKind::Logistic);
  const auto curve = pt::learning_curve(f.y, {1.0}, 13, runner_for(f, spec));
  const auto [train, val] = pt::stratified_holdout(f.y, 0.2, pt::derive_seed(13, 0));
  const auto plain = runner_for(f, spec)(train, val);
  ASSERT_EQ(curve.points.size(), 1u);
  EXPECT_EQ(curve.points[0].size, train.size());
  EXPECT_EQ(curve.validation_rows, val);
  EXPECT_EQ(curve.points[0].train, plain.first);
  EXPECT_EQ(curve.points[0].validation, plain.second);
}

TEST(LearningCurve, MemorizingForestIsPerfectOnTrain) {
  const auto f = noisy_fixture(14);
  auto spec = pt::LearnerSpec::of(pt::LearnerKind::Forest);
  spec.bootstrap = false;
  spec.n_trees = 5;
  spec.max_features = 9;
  const auto curve = pt::learning_curve(f.y, {0.25, 0.5, 0.75, 1.0}, 15, runner_for(f, spec));
  for (const auto& p : curve.points) EXPECT_EQ(p.train, 1.0) << p.size;
  for (std::size_t i = 1; i < curve.points.size(); ++i) EXPECT_GT(curve.points[i].size, curve.points[i - 1].size);
}

TEST(LearningCurve, HighCapacityGapExceedsRegularizedGap) {
  const auto f = noisy_fixture(16);
  auto forest = pt::LearnerSpec::of(pt::LearnerKind::Forest);
  forest.bootstrap = false;
  forest.n_trees = 5;
  forest.max_features = 9;
  auto linear = pt::LearnerSpec::of(pt::LearnerKind::Logistic);
  linear.l2_lambda = 0.1;
  const std::vector<double> fr{0.3, 0.6, 1.0};
  const auto high = pt::learning_curve(f.y, fr, 17, runner_for(f, forest));
  const auto low = pt::learning_curve(f.y, fr, 17, runner_for(f, linear));
  EXPECT_GE(high.mean_gap, low.mean_gap);
}

TEST(LearningCurve, RejectsBadFractions) {
  const pt::Labels y{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  auto run = [](const std::vector<std::size_t>&, const std::vector<std::size_t>&) { return std::make_pair(0.0, 0.0); };
  expect_error(pt::ErrorKind::InvalidFraction, [&] { pt::learning_curve(y, {0.0}, 1, run); });
  expect_error(pt::ErrorKind::InvalidFraction, [&] { pt::learning_curve(y, {1.5}, 1, run); });
  expect_error(pt::ErrorKind::InvalidFraction, [&] { pt::learning_curve(y, {}, 1, run); });
}

namespace {

struct Scored {
  pt::Labels y;
  pt::Vector s;
};

Scored scored_fixture(std::uint64_t seed, int n = 20) {
  pt::Rng rng(seed);
  Scored f;
  f.s.resize(n);
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    f.y.push_back(label);
    f.s(i) = std::round((rng.normal() + 1.2 * label) * 4.0) / 4.0;
  }
  return f;
}

// Exhaustive scan over -inf and every score value.
std::pair<double, bool> scan(const Scored& f, pt::TuneMetric metric, double target) {
  std::vector<double> cands{-std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < f.s.size(); ++i) cands.push_back(f.s(i));
  std::sort(cands.begin(), cands.end());
  std::optional<double> pick;
  for (double t : cands) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < f.y.size(); ++i) {
      const bool p = f.s(static_cast<Eigen::Index>(i)) > t;
      tp += p && f.y[i];
      fp += p && !f.y[i];
      fn += !p && f.y[i];
    }
    if (metric == pt::TuneMetric::Recall) {
      if (tp / (tp + fn) >= target) pick = t;
    } else if (tp + fp > 0 && tp / (tp + fp) >= target && !pick) {
      pick = t;
    }
  }
  return {pick.value_or(0.0), pick.has_value()};
}

void expect_same_cut(double ours, double oracle, const pt::Vector& s) {
  if (std::isinf(oracle)) {
    EXPECT_LT(ours, s.minCoeff());
  } else {
    EXPECT_EQ(ours, oracle);
  }
}

}  // namespace

TEST(TuneThreshold, MatchesExhaustiveScan) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto f = scored_fixture(seed);
    for (double target : {0.5, 0.7, 0.8, 0.91, 1.0}) {
      const auto [t, ok] = scan(f, pt::TuneMetric::Recall, target);
      ASSERT_TRUE(ok);
      const auto got = pt::tune_threshold(f.y, f.s, pt::TuneMetric::Recall, target);
      expect_same_cut(got.threshold, t, f.s);
      EXPECT_GE(got.metrics.recall, target);
      const auto [tp, okp] = scan(f, pt::TuneMetric::Precision, target);
      if (okp) {
        const auto gp = pt::tune_threshold(f.y, f.s, pt::TuneMetric::Precision, target);
        expect_same_cut(gp.threshold, tp, f.s);
        EXPECT_GE(gp.metrics.precision, target);
      } else {
        expect_error(pt::ErrorKind::TargetUnreachable,
                     [&] { pt::tune_threshold(f.y, f.s, pt::TuneMetric::Precision, target); });
      }
    }
  }
}

TEST(TuneThreshold, FullRecallCutsBelowSmallestPositive) {
  const auto f = scored_fixture(30);
  double min_pos = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.y.size(); ++i) {
    if (f.y[i]) min_pos = std::min(min_pos, f.s(static_cast<Eigen::Index>(i)));
  }
  const auto got = pt::tune_threshold(f.y, f.s, pt::TuneMetric::Recall, 1.0);
  EXPECT_LT(got.threshold, min_pos);
  EXPECT_EQ(got.metrics.recall, 1.0);
}

TEST(TuneThreshold, ZeroRecallCutsAtTheTop) {
  const auto f = scored_fixture(31);
  const auto got = pt::tune_threshold(f.y, f.s, pt::TuneMetric::Recall, 0.0);
  EXPECT_GE(got.threshold, f.s.maxCoeff());
  EXPECT_TRUE(got.metrics.precision_degenerate);
}

TEST(TuneThreshold, UnreachableReportsBest) {
  const pt::Labels y{0, 0, 1, 1};
  const auto s = vec({0.9, 0.8, 0.2, 0.1});
  try {
    pt::tune_threshold(y, s, pt::TuneMetric::Precision, 0.9);
    ADD_FAILURE() << "expected TargetUnreachable";
  } catch (const pt::TargetUnreachableError& e) {
    EXPECT_EQ(e.kind(), pt::ErrorKind::TargetUnreachable);
    EXPECT_DOUBLE_EQ(e.best(), 0.5);
  }
}

TEST(Output, CsvAndSvg) {
  const auto roc = pt::roc_auc({1, 0, 1, 0}, vec({0.9, 0.8, 0.7, 0.1}));
  const auto dir = fs::temp_directory_path() / ("parsitext_eval_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  pt::write_roc_csv(roc, (dir / "roc.csv").string());
  std::ifstream in(dir / "roc.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "fpr,tpr,threshold");
  EXPECT_EQ(first, "0,0,inf");

  pt::LearningCurve curve;
  curve.points = {{0.5, 10, 1.0, 0.7}, {1.0, 20, 0.9, 0.8}};
  pt::write_learning_curve_csv(curve, (dir / "lc.csv").string());
  std::ifstream lc(dir / "lc.csv");
  std::stringstream ss;
  ss << lc.rdbuf();
  EXPECT_EQ(ss.str(), "size,train,val\n10,1,0.7\n20,0.9,0.8\n");

  const auto svg = pt::svg_line_chart("ROC", "fpr", "tpr", {{"model", {0, 0.5, 1}, {0, 0.75, 1}}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  fs::remove_all(dir);
}
