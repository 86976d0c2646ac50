#include <gtest/gtest.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "parsitext/ensemble.hpp"
#include "parsitext/feature_selection.hpp"
#include "parsitext/random.hpp"
#include "parsitext/serialize.hpp"

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

struct Fixture {
  pt::Matrix X;
  pt::Labels y;
};

// Blobs around (-3,-3) and (3,3), with [x + 4, 4 - x] columns so that every
// learner, multinomial NB included, separates them.
Fixture blobs(std::uint64_t seed, int per_class = 40) {
  pt::Rng rng(seed);
  Fixture f;
  f.X.resize(2 * per_class, 4);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int label = i % 2;
    const double c = label ? 3.0 : -3.0;
    double dx, dy;
    do {
      dx = 2.0 * rng.uniform() - 1.0;
      dy = 2.0 * rng.uniform() - 1.0;
    } while (dx * dx + dy * dy > 1.0);
    const double a = c + dx, b = c + dy;
    f.X.row(i) << a + 4.0, b + 4.0, 4.0 - a, 4.0 - b;
    f.y.push_back(label);
  }
  return f;
}

// Quadrant labels with unequal quadrant sizes, so no single stump is perfect
// but the first one beats chance.
Fixture xor_ish() {
  pt::Rng rng(17);
  Fixture f;
  const int sizes[4] = {14, 10, 6, 10};
  const double sx[4] = {1, -1, -1, 1}, sy[4] = {1, 1, -1, -1};
  const int label[4] = {1, 0, 1, 0};
  f.X.resize(40, 2);
  int r = 0;
  for (int q = 0; q < 4; ++q) {
    for (int i = 0; i < sizes[q]; ++i, ++r) {
      f.X(r, 0) = sx[q] * (0.1 + rng.uniform());
      f.X(r, 1) = sy[q] * (0.1 + rng.uniform());
      f.y.push_back(label[q]);
    }
  }
  return f;
}

double accuracy(const pt::Labels& pred, const pt::Labels& y) {
  int ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

pt::TrainedModel leaf_model(double positive) {
  pt::TreeModel t;
  t.kind = pt::TreeKind::Stump;
  t.n_features = 1;
  pt::DecisionTree tree;
  pt::TreeNode leaf;
  leaf.counts = {1.0 - positive, positive};
  tree.nodes.push_back(leaf);
  t.trees.push_back(tree);
  return pt::TrainedModel{pt::LearnerKind::Stump, t};
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("parsitext_ensemble_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Voting, IdenticalMembersEqualSingleMember) {
  auto f = blobs(1);
  const auto gnb = pt::LearnerSpec::of(pt::LearnerKind::Gnb);
  const auto single = pt::train(gnb, f.X, f.y, 5);
  const auto vote = pt::train_voting({gnb, gnb, gnb}, f.X, f.y, 5);
  const pt::Vector a = pt::positive_proba(single, f.X), b = pt::positive_proba(vote, f.X);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(pt::predict(single, f.X), pt::predict(vote, f.X));
}

TEST(Voting, AveragesMemberProbabilities) {
  pt::EnsembleModel e;
  e.kind = pt::EnsembleKind::Voting;
  e.members = {leaf_model(0.1), leaf_model(0.8)};
  e.member_weights = {1.0, 1.0};
  const pt::TrainedModel m{pt::LearnerKind::Voting, e};
  const pt::Matrix x = pt::Matrix::Zero(1, 1);
  const pt::Matrix p = pt::predict_proba(m, x);
  EXPECT_NEAR(p(0, 0), 0.55, 1e-15);
  EXPECT_NEAR(p(0, 1), 0.45, 1e-15);
  EXPECT_EQ(pt::predict(m, x).front(), 0);
}

TEST(Voting, DefaultRosterIsPerfectOnBlobs) {
  auto f = blobs(2);
  const auto roster = pt::default_voting_roster();
  ASSERT_EQ(roster.size(), 5u);
  for (const auto& spec : roster) {
    EXPECT_EQ(accuracy(pt::predict(pt::train(spec, f.X, f.y, 3), f.X), f.y), 1.0) << pt::to_string(spec.kind);
  }
  const auto vote = pt::train(pt::LearnerSpec::of(pt::LearnerKind::Voting), f.X, f.y, 3);
  EXPECT_EQ(accuracy(pt::predict(vote, f.X), f.y), 1.0);
  const pt::Matrix p = pt::predict_proba(vote, f.X);
  EXPECT_LE((p.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Voting, MemberErrorsPropagate) {
  auto f = blobs(3);
  f.X(0, 0) = -1.0;
  expect_error(pt::ErrorKind::NegativeFeature,
               [&] { pt::train_voting({pt::LearnerSpec::of(pt::LearnerKind::Mnb)}, f.X, f.y, 1); });
}

TEST(Pasting, IndexSetsHaveSampleSizeDistinctRows) {
  auto f = blobs(4, 150);
  const auto m = pt::train_pasting(pt::LearnerSpec::of(pt::LearnerKind::Gnb), f.X, f.y, 6, 200, 9);
  const auto& e = std::get<pt::EnsembleModel>(m.model);
  ASSERT_EQ(e.sample_indices.size(), 6u);
  for (const auto& rows : e.sample_indices) {
    EXPECT_EQ(rows.size(), 200u);
    EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()).size(), 200u);
    EXPECT_LT(rows.back(), 300u);
  }
  EXPECT_NE(e.sample_indices[0], e.sample_indices[1]);
  const auto again = pt::train_pasting(pt::LearnerSpec::of(pt::LearnerKind::Gnb), f.X, f.y, 6, 200, 9);
  EXPECT_EQ(std::get<pt::EnsembleModel>(again.model).sample_indices, e.sample_indices);
  EXPECT_EQ(accuracy(pt::predict(m, f.X), f.y), 1.0);
}

TEST(Pasting, FullSampleGivesIdenticalMembers) {
  auto f = blobs(5);
  const auto m = pt::train_pasting(pt::LearnerSpec::of(pt::LearnerKind::Lda), f.X, f.y, 4,
                                   static_cast<std::size_t>(f.X.rows()), 2);
  const auto& e = std::get<pt::EnsembleModel>(m.model);
  const pt::Vector first = pt::positive_proba(e.members[0], f.X);
  for (const auto& member : e.members) EXPECT_EQ(pt::positive_proba(member, f.X), first);
}

TEST(Pasting, SingleEstimatorEqualsBaseOnSubset) {
  auto f = blobs(6);
  const auto base = pt::LearnerSpec::of(pt::LearnerKind::Gnb);
  const auto m = pt::train_pasting(base, f.X, f.y, 1, 30, 8);
  const auto& rows = std::get<pt::EnsembleModel>(m.model).sample_indices.front();
  const auto direct = pt::train(base, pt::take_rows(f.X, rows), pt::take(f.y, rows), 0);
  EXPECT_LE((pt::positive_proba(m, f.X) - pt::positive_proba(direct, f.X)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pasting, RejectsOversizedSample) {
  auto f = blobs(7);
  expect_error(pt::ErrorKind::InvalidSampleSize, [&] {
    pt::train_pasting(pt::LearnerSpec::of(pt::LearnerKind::Gnb), f.X, f.y, 2, 81, 1);
  });
  expect_error(pt::ErrorKind::InvalidSampleSize, [&] {
    pt::train_pasting(pt::LearnerSpec::of(pt::LearnerKind::Gnb), f.X, f.y, 2, 0, 1);
  });
}

TEST(AdaBoost, PerfectStumpStopsAfterOneRound) {
  auto f = blobs(8);
  pt::AdaBoostTrace trace;
  const auto m = pt::train_adaboost(f.X, f.y, 100, &trace);
  const auto& e = std::get<pt::EnsembleModel>(m.model);
  EXPECT_EQ(e.members.size(), 1u);
  EXPECT_EQ(trace.training_errors.back(), 0.0);
  EXPECT_TRUE(std::isfinite(e.member_weights.front()));
  EXPECT_EQ(accuracy(pt::predict(m, f.X), f.y), 1.0);
}

TEST(AdaBoost, TrainingErrorBelowExponentialBound) {
  auto f = xor_ish();
  pt::AdaBoostTrace trace;
  const auto m = pt::train_adaboost(f.X, f.y, 100, &trace);
  const auto& e = std::get<pt::EnsembleModel>(m.model);
  ASSERT_GT(e.members.size(), 1u);

  // Recompute the bound independently from the recorded errors.
  double bound = 1.0;
  for (std::size_t r = 0; r < trace.errors.size(); ++r) {
    const double eps = trace.errors[r];
    EXPECT_LT(eps, 0.5);
    EXPECT_NEAR(trace.weight_sums[r], 1.0, 1e-9);
    bound *= 2.0 * std::sqrt(eps * (1.0 - eps));
    EXPECT_LE(trace.training_errors[r], bound + 1e-12) << "round " << r;
  }
  EXPECT_EQ(trace.errors, e.round_errors);
  EXPECT_LT(trace.training_errors.back(), 0.5);
}

TEST(AdaBoost, ScoreIsWeightedStumpSum) {
  auto f = xor_ish();
  const auto m = pt::train_adaboost(f.X, f.y, 5);
  const auto& e = std::get<pt::EnsembleModel>(m.model);
  pt::Vector F = pt::Vector::Zero(f.X.rows());
  for (std::size_t i = 0; i < e.members.size(); ++i) {
    F += e.member_weights[i] * std::get<pt::TreeModel>(e.members[i].model).stump_sign(f.X);
  }
  EXPECT_LE((pt::scores(m, f.X) - F).cwiseAbs().maxCoeff(), 1e-12);
  const pt::Vector p = pt::positive_proba(m, f.X);
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_EQ(p(i) > 0.5, F(i) > 0.0);
}

TEST(AdaBoost, ChanceLevelDataIsRejected) {
  pt::Matrix X(4, 1);
  X << 0, 0, 1, 1;
  expect_error(pt::ErrorKind::DegenerateLabels, [&] { pt::train_adaboost(X, {0, 1, 0, 1}, 10); });
}

TEST(FeatureSelection, KeepsInformativeColumn) {
  pt::Rng rng(3);
  const int n = 120;
  pt::Matrix X(n, 6);
  pt::Labels y;
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    y.push_back(label);
    X(i, 0) = label + 0.3 * rng.normal();
    for (int j = 1; j < 6; ++j) X(i, j) = rng.normal();
  }
  pt::ForestParams p;
  p.n_trees = 50;
  p.seed = 4;
  const auto mask = pt::select_features_by_importance(X, y, std::nullopt, p);
  ASSERT_EQ(mask.size(), 6u);
  EXPECT_TRUE(mask[0]);
  EXPECT_LT(std::count(mask.begin(), mask.end(), true), 6);
  const pt::Matrix kept = pt::apply_mask(X, mask);
  EXPECT_EQ(kept.col(0), X.col(0));
}

TEST(FeatureSelection, ZeroCutoffKeepsEverything) {
  auto f = blobs(9);
  const auto mask = pt::select_features_by_importance(f.X, f.y, 0.0);
  EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 4);
}

TEST(FeatureSelection, MaskDropsColumnsAndNames) {
  pt::Matrix X(2, 3);
  X << 1, 2, 3, 4, 5, 6;
  const auto fm = pt::make_dense(X, pt::NormState::Tfidf, {"a", "b", "c"});
  const auto out = pt::apply_mask(fm, {true, false, true});
  EXPECT_EQ(out.feature_names, (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(out.state, pt::NormState::Reduced);
  EXPECT_EQ(out.dense()(1, 1), 6.0);
  expect_error(pt::ErrorKind::ShapeMismatch, [&] { pt::apply_mask(X, {true}); });
}

TEST(Serialize, RoundTripPreservesPredictionsForEveryKind) {
  auto f = blobs(10);
  pt::Rng rng(11);
  pt::Matrix probe(100, 4);
  for (int r = 0; r < 100; ++r)
    for (int c = 0; c < 4; ++c) probe(r, c) = 8.0 * rng.uniform();

  std::vector<pt::LearnerSpec> specs;
  for (auto k : {pt::LearnerKind::Svm, pt::LearnerKind::Logistic, pt::LearnerKind::Mnb, pt::LearnerKind::Gnb,
                 pt::LearnerKind::Forest, pt::LearnerKind::Lda, pt::LearnerKind::Stump, pt::LearnerKind::Voting,
                 pt::LearnerKind::AdaBoost}) {
    specs.push_back(pt::LearnerSpec::of(k));
  }
  auto pasting = pt::LearnerSpec::of(pt::LearnerKind::Pasting);
  pasting.sample_size = 40;
  pasting.n_estimators = 3;
  specs.push_back(pasting);

  const auto path = temp_file("roundtrip.json");
  for (const auto& spec : specs) {
    auto spec_copy = spec;
    if (spec.kind == pt::LearnerKind::Forest) spec_copy.n_trees = 20;
    const auto model = pt::train(spec_copy, f.X, f.y, 12);
    pt::save_model(model, path.string());
    const auto loaded = pt::load_model(path.string());
    EXPECT_EQ(loaded.kind, model.kind);
    EXPECT_EQ(pt::scores(loaded, probe), pt::scores(model, probe)) << pt::to_string(spec.kind);
    EXPECT_EQ(pt::predict(loaded, probe), pt::predict(model, probe));
    EXPECT_EQ(pt::threshold(loaded), pt::threshold(model));
    EXPECT_EQ(pt::model_to_json(loaded).dump(), pt::model_to_json(model).dump());
  }
  fs::remove(path);
}

TEST(Serialize, TruncatedFileIsCorrupt) {
  auto f = blobs(12);
  const auto path = temp_file("truncated.json");
  pt::save_model(pt::train(pt::LearnerSpec::of(pt::LearnerKind::Gnb), f.X, f.y, 1), path.string());
  const auto size = fs::file_size(path);
  fs::resize_file(path, size / 2);
  expect_error(pt::ErrorKind::CorruptModel, [&] { pt::load_model(path.string()); });
  fs::remove(path);
}

TEST(Serialize, UnknownSchemaVersion) {
  auto f = blobs(13);
  auto doc = pt::model_to_json(pt::train(pt::LearnerSpec::of(pt::LearnerKind::Lda), f.X, f.y, 1));
  doc["schema_version"] = 999;
  const auto path = temp_file("future.json");
  std::ofstream(path) << doc.dump();
  expect_error(pt::ErrorKind::UnknownSchema, [&] { pt::load_model(path.string()); });
  fs::remove(path);
}

TEST(Serialize, StructuralDamageIsCorrupt) {
  auto f = blobs(14);
  auto doc = pt::model_to_json(pt::train(pt::LearnerSpec::of(pt::LearnerKind::Stump), f.X, f.y, 1));
  doc["parameters"]["trees"][0]["left"][0] = 0;
  expect_error(pt::ErrorKind::CorruptModel, [&] { pt::model_from_json(doc); });
  doc = pt::model_to_json(pt::train(pt::LearnerSpec::of(pt::LearnerKind::Svm), f.X, f.y, 1));
  doc["parameters"].erase("weights");
  expect_error(pt::ErrorKind::CorruptModel, [&] { pt::model_from_json(doc); });
  doc["model_kind"] = "perceptron";
  expect_error(pt::ErrorKind::CorruptModel, [&] { pt::model_from_json(doc); });
}

TEST(Serialize, LearnerSpecRoundTrip) {
  auto spec = pt::LearnerSpec::of(pt::LearnerKind::Pasting);
  spec.n_estimators = 7;
  spec.sample_size = 50;
  auto base = pt::LearnerSpec::of(pt::LearnerKind::Voting);
  base.members = {pt::LearnerSpec::of(pt::LearnerKind::Lda), pt::LearnerSpec::of(pt::LearnerKind::Gnb)};
  spec.members = {base};
  const auto j = pt::learner_spec_to_json(spec);
  const auto back = pt::learner_spec_from_json(j);
  EXPECT_EQ(pt::learner_spec_to_json(back).dump(), j.dump());
  EXPECT_EQ(back.members.front().members.size(), 2u);
  EXPECT_EQ(pt::learner_spec_from_json(pt::Json("forest")).kind, pt::LearnerKind::Forest);
  expect_error(pt::ErrorKind::InvalidArgument,
               [] { pt::learner_spec_from_json(pt::Json{{"kind", "svm"}, {"epochs", "many"}}); });
}
