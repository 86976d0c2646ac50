#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "parsitext/dataset.hpp"
#include "parsitext/ensemble.hpp"
#include "parsitext/error.hpp"
#include "parsitext/eval.hpp"
#include "parsitext/feature_selection.hpp"
#include "parsitext/features.hpp"
#include "parsitext/kmeans.hpp"
#include "parsitext/pca.hpp"
#include "parsitext/serialize.hpp"
#include "parsitext/text_norm.hpp"
#include "parsitext/tokenize.hpp"

namespace parsitext {

struct TextOptions {
  bool stem = true;
  bool remove_stopwords = true;
  /// Transliterate Latin-script words before normalizing.
  bool fenglish = false;
  /// Empty paths select the built-in tables.
  std::string normalization_rules;
  std::string affixes;
  std::string stopwords;
  std::string stem_rules;
  std::string fenglish_table;
};

enum class ClusterMode { None, Distances, Centers, Combined };

inline std::string_view to_string(ClusterMode m) {
  switch (m) {
    case ClusterMode::None: return "none";
    case ClusterMode::Distances: return "distances";
    case ClusterMode::Centers: return "centers";
    case ClusterMode::Combined: return "combined";
  }
  return "?";
}

inline ClusterMode cluster_mode_from_string(std::string_view s) {
  for (auto m : {ClusterMode::None, ClusterMode::Distances, ClusterMode::Centers, ClusterMode::Combined}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorKind::InvalidArgument, "cluster features must be none, distances, centers or combined");
}

struct FeatureSpec {
  NgramUnit unit = NgramUnit::Word;
  std::size_t n = 1;
  bool tfidf = true;
  std::size_t min_df = 1;
  /// 0 disables PCA.
  double pca_ratio = 0.99;
  std::size_t kmeans_k = 37;
  ClusterMode cluster_features = ClusterMode::None;
  bool selection = false;
  std::size_t selection_trees = 100;
};

struct EvalSpec {
  double test_fraction = 0.2;
  bool stratified = true;
  /// Below 2 disables cross-validation.
  std::size_t cv_folds = 10;
  /// Empty disables the learning curve.
  std::vector<double> curve_fractions{0.1, 0.25, 0.5, 0.75, 1.0};
  double validation_fraction = 0.2;
  std::optional<TuneMetric> tune_metric = TuneMetric::Recall;
  double tune_target = 0.91;
  bool svg = true;
};

struct DataSpec {
  /// Empty means: generate the synthetic corpus.
  std::string path;
  LoadOptions load;
  std::size_t synthetic_docs = 2000;
  double synthetic_noise = 0.0;
};

struct ExperimentConfig {
  std::string preset = "paper-default";
  std::uint64_t seed = 42;
  DataSpec data;
  TextOptions text;
  FeatureSpec features;
  LearnerSpec learner = LearnerSpec::of(LearnerKind::Svm);
  EvalSpec eval;
};

/// normalize, tokenize with stemming and stopwords, word unigram TF-IDF,
/// PCA at 0.99, linear SVM. No clustering or selection.
inline ExperimentConfig paper_default_config() { return ExperimentConfig{}; }

inline Json config_to_json(const ExperimentConfig& c) {
  Json label_map = Json::object();
  for (const auto& [k, v] : c.data.load.label_map) label_map[k] = v;
  std::string format = "auto";
  if (c.data.load.format) format = *c.data.load.format == TableFormat::Csv ? "csv" : "tsv";
  Json tune = nullptr;
  if (c.eval.tune_metric) tune = Json{{"metric", std::string(to_string(*c.eval.tune_metric))}, {"target", c.eval.tune_target}};
  return Json{
      {"preset", c.preset},
      {"seed", c.seed},
      {"data",
       {{"path", c.data.path},
        {"format", format},
        {"text_column", c.data.load.text_column},
        {"label_column", c.data.load.label_column},
        {"id_column", c.data.load.id_column},
        {"label_map", label_map},
        {"synthetic_docs", c.data.synthetic_docs},
        {"synthetic_noise", c.data.synthetic_noise}}},
      {"text",
       {{"stem", c.text.stem},
        {"remove_stopwords", c.text.remove_stopwords},
        {"fenglish", c.text.fenglish},
        {"normalization_rules", c.text.normalization_rules},
        {"affixes", c.text.affixes},
        {"stopwords", c.text.stopwords},
        {"stem_rules", c.text.stem_rules},
        {"fenglish_table", c.text.fenglish_table}}},
      {"features",
       {{"unit", std::string(to_string(c.features.unit))},
        {"n", c.features.n},
        {"tfidf", c.features.tfidf},
        {"min_df", c.features.min_df},
        {"pca_ratio", c.features.pca_ratio},
        {"kmeans_k", c.features.kmeans_k},
        {"cluster_features", std::string(to_string(c.features.cluster_features))},
        {"selection", c.features.selection},
        {"selection_trees", c.features.selection_trees}}},
      {"learner", learner_spec_to_json(c.learner)},
      {"eval",
       {{"test_fraction", c.eval.test_fraction},
        {"stratified", c.eval.stratified},
        {"cv_folds", c.eval.cv_folds},
        {"curve_fractions", c.eval.curve_fractions},
        {"validation_fraction", c.eval.validation_fraction},
        {"tune", tune},
        {"svg", c.eval.svg}}}};
}

namespace detail {

// Rejects keys the defaults do not have.
inline void check_known_keys(const Json& patch, const Json& defaults, const std::string& where) {
  if (!patch.is_object() || !defaults.is_object()) return;
  for (const auto& [key, value] : patch.items()) {
    if (!defaults.contains(key)) throw Error(ErrorKind::InvalidArgument, "unknown config key '" + where + key + "'");
    if (key == "learner" || key == "label_map" || key == "tune") continue;
    check_known_keys(value, defaults.at(key), where + key + ".");
  }
}

}  // namespace detail

/// Applies a key-value JSON patch on top of `base`. Missing keys keep their values.
inline ExperimentConfig config_from_json(const Json& patch, const ExperimentConfig& base = paper_default_config()) {
  Json j = config_to_json(base);
  detail::check_known_keys(patch, j, "");
  if (patch.contains("learner")) j.erase("learner");
  if (patch.contains("data") && patch.at("data").contains("label_map")) j["data"].erase("label_map");
  j.merge_patch(patch);
  ExperimentConfig c;
  try {
    c.preset = j.at("preset").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const Json& d = j.at("data");
    c.data.path = d.at("path").get<std::string>();
    const auto format = d.at("format").get<std::string>();
    if (format == "csv") {
      c.data.load.format = TableFormat::Csv;
    } else if (format == "tsv") {
      c.data.load.format = TableFormat::Tsv;
    } else if (format != "auto") {
      throw Error(ErrorKind::InvalidArgument, "data.format must be auto, csv or tsv");
    }
    c.data.load.text_column = d.at("text_column").get<std::string>();
    c.data.load.label_column = d.at("label_column").get<std::string>();
    c.data.load.id_column = d.at("id_column").get<std::string>();
    c.data.load.label_map.clear();
    for (const auto& [k, v] : d.at("label_map").items()) c.data.load.label_map[k] = v.get<int>();
    c.data.synthetic_docs = d.at("synthetic_docs").get<std::size_t>();
    c.data.synthetic_noise = d.at("synthetic_noise").get<double>();

    const Json& t = j.at("text");
    c.text.stem = t.at("stem").get<bool>();
    c.text.remove_stopwords = t.at("remove_stopwords").get<bool>();
    c.text.fenglish = t.at("fenglish").get<bool>();
    c.text.normalization_rules = t.at("normalization_rules").get<std::string>();
    c.text.affixes = t.at("affixes").get<std::string>();
    c.text.stopwords = t.at("stopwords").get<std::string>();
    c.text.stem_rules = t.at("stem_rules").get<std::string>();
    c.text.fenglish_table = t.at("fenglish_table").get<std::string>();

    const Json& f = j.at("features");
    c.features.unit = ngram_unit_from_string(f.at("unit").get<std::string>());
    c.features.n = f.at("n").get<std::size_t>();
    c.features.tfidf = f.at("tfidf").get<bool>();
    c.features.min_df = f.at("min_df").get<std::size_t>();
    c.features.pca_ratio = f.at("pca_ratio").is_null() ? 0.0 : f.at("pca_ratio").get<double>();
    c.features.kmeans_k = f.at("kmeans_k").get<std::size_t>();
    c.features.cluster_features = cluster_mode_from_string(f.at("cluster_features").get<std::string>());
    c.features.selection = f.at("selection").get<bool>();
    c.features.selection_trees = f.at("selection_trees").get<std::size_t>();

    c.learner = learner_spec_from_json(j.at("learner"));

    const Json& e = j.at("eval");
    c.eval.test_fraction = e.at("test_fraction").get<double>();
    c.eval.stratified = e.at("stratified").get<bool>();
    c.eval.cv_folds = e.at("cv_folds").get<std::size_t>();
    c.eval.curve_fractions = e.at("curve_fractions").get<std::vector<double>>();
    c.eval.validation_fraction = e.at("validation_fraction").get<double>();
    if (e.at("tune").is_null()) {
      c.eval.tune_metric.reset();
    } else {
      c.eval.tune_metric = tune_metric_from_string(e.at("tune").at("metric").get<std::string>());
      c.eval.tune_target = e.at("tune").at("target").get<double>();
    }
    c.eval.svg = e.at("svg").get<bool>();
  } catch (const Json::exception& ex) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad config value: ") + ex.what());
  }
  if (c.features.n == 0) throw Error(ErrorKind::InvalidArgument, "features.n must be at least 1");
  if (!(c.features.pca_ratio >= 0.0 && c.features.pca_ratio <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "features.pca_ratio must lie in [0, 1]");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base = paper_default_config()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  try {
    return config_from_json(Json::parse(in), base);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
  }
}

inline std::string config_hash(const ExperimentConfig& c) { return fnv1a_hex(config_to_json(c).dump()); }

/// Owns the tables a Preprocessor points into.
class TextPipeline {
 public:
  explicit TextPipeline(const TextOptions& options = {}) : options_(options) {
    if (!options.normalization_rules.empty() || !options.affixes.empty()) {
      if (options.normalization_rules.empty() || options.affixes.empty()) {
        throw Error(ErrorKind::InvalidArgument, "custom normalization needs both a rules file and an affix file");
      }
      table_ = std::make_shared<NormalizationTable>(
          NormalizationTable::load(options.normalization_rules, options.affixes));
      pre_.table = table_.get();
    }
    if (!options.stopwords.empty()) {
      stopwords_ = std::make_shared<StopwordSet>(load_stopwords(options.stopwords, *pre_.table));
      pre_.stopwords = stopwords_.get();
    }
    if (!options.stem_rules.empty()) {
      stemmer_ = std::make_shared<StemmerRules>(StemmerRules::load(options.stem_rules));
      pre_.stemmer = stemmer_.get();
    }
    if (!options.fenglish_table.empty()) {
      translit_ = std::make_shared<TransliterationTable>(TransliterationTable::load(options.fenglish_table));
    }
    pre_.use_stemming = options.stem;
    pre_.remove_stops = options.remove_stopwords;
  }

  const TextOptions& options() const { return options_; }
  const Preprocessor& preprocessor() const { return pre_; }

  std::string prepare(std::string_view raw) const {
    if (!options_.fenglish) return std::string(raw);
    return transliterate_fenglish(raw, translit_ ? *translit_ : TransliterationTable::defaults(), *pre_.table);
  }

  TokenStream operator()(std::string_view raw, std::string doc_id = {}) const {
    return pre_(prepare(raw), std::move(doc_id));
  }

  std::vector<TokenStream> operator()(const Dataset& ds) const {
    std::vector<TokenStream> out(ds.size());
    parallel_for(ds.size(), [&](std::size_t i) {
      const auto& d = ds.documents[i];
      try {
        out[i] = (*this)(d.text, d.id);
      } catch (const Error& e) {
        throw Error(e.kind(), "document '" + d.id + "': " + e.message());
      }
    });
    return out;
  }

 private:
  TextOptions options_;
  Preprocessor pre_;
  std::shared_ptr<NormalizationTable> table_;
  std::shared_ptr<StopwordSet> stopwords_;
  std::shared_ptr<StemmerRules> stemmer_;
  std::shared_ptr<TransliterationTable> translit_;
};

/// Every stateful transform, fitted on training documents only.
struct FittedFeatures {
  FeatureSpec spec;
  Vocabulary vocab;
  std::optional<PcaModel> pca;
  std::optional<KMeansModel> kmeans;
  /// Empty keeps every column.
  std::vector<bool> mask;

  Matrix transform(const std::vector<TokenStream>& docs) const {
    const FeatureMatrix base = spec.tfidf ? tfidf_transform(docs, vocab) : count_transform(docs, vocab);
    Matrix X = base.dense();
    if (pca) X = pca_transform(X, *pca);
    if (kmeans) X = cluster_features(X);
    if (!mask.empty()) X = apply_mask(X, mask);
    return X;
  }

  /// Keeps the sparse counts or TF-IDF when no later transform is configured.
  FeatureMatrix transform_features(const std::vector<TokenStream>& docs) const {
    FeatureMatrix base = spec.tfidf ? tfidf_transform(docs, vocab) : count_transform(docs, vocab);
    if (!pca && !kmeans && mask.empty()) return base;
    return make_dense(transform(docs), NormState::Reduced);
  }

  Matrix cluster_features(const Matrix& X) const {
    const Matrix dist = cluster_distance_features(X, *kmeans).dense();
    if (spec.cluster_features == ClusterMode::Distances) return dist;
    const Matrix centers = cluster_center_features(X, *kmeans).dense();
    if (spec.cluster_features == ClusterMode::Centers) return centers;
    Matrix all(X.rows(), dist.cols() + centers.cols() + X.cols());
    all << dist, centers, X;
    return all;
  }
};

inline std::vector<TokenStream> take(const std::vector<TokenStream>& docs, const std::vector<std::size_t>& rows) {
  std::vector<TokenStream> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(docs[r]);
  return out;
}

/// Fits the transforms on `docs` and returns them with the transformed matrix.
inline std::pair<FittedFeatures, Matrix> fit_features(const FeatureSpec& spec, const std::vector<TokenStream>& docs,
                                                     const Labels& y, std::uint64_t seed) {
  FittedFeatures f;
  f.spec = spec;
  f.vocab = build_vocabulary(docs, spec.unit, spec.n, spec.min_df);
  if (f.vocab.size() == 0) throw Error(ErrorKind::EmptyCorpus, "training documents produced no features");
  const FeatureMatrix base = spec.tfidf ? tfidf_transform(docs, f.vocab) : count_transform(docs, f.vocab);
  Matrix X = base.dense();
  if (spec.pca_ratio > 0.0) {
    f.pca = pca_fit(X, spec.pca_ratio);
    X = pca_transform(X, *f.pca);
  }
  if (spec.cluster_features != ClusterMode::None) {
    const auto k = std::min<std::size_t>(spec.kmeans_k, static_cast<std::size_t>(X.rows()));
    f.kmeans = kmeans_fit(X, k, derive_seed(seed, 101));
    X = f.cluster_features(X);
  }
  if (spec.selection) {
    ForestParams p;
    p.n_trees = spec.selection_trees;
    p.seed = derive_seed(seed, 102);
    f.mask = select_features_by_importance(X, y, std::nullopt, p);
    X = apply_mask(X, f.mask);
  }
  return {std::move(f), std::move(X)};
}

inline Json features_to_json(const FittedFeatures& f) {
  Json j{{"unit", std::string(to_string(f.spec.unit))},
         {"n", f.spec.n},
         {"tfidf", f.spec.tfidf},
         {"min_df", f.spec.min_df},
         {"pca_ratio", f.spec.pca_ratio},
         {"kmeans_k", f.spec.kmeans_k},
         {"cluster_features", std::string(to_string(f.spec.cluster_features))},
         {"selection", f.spec.selection},
         {"selection_trees", f.spec.selection_trees},
         {"vocabulary", {{"n_docs", f.vocab.n_docs}, {"names", f.vocab.names}, {"doc_freq", f.vocab.doc_freq}}}};
  if (f.pca) {
    j["pca"] = {{"target_ratio", f.pca->target_ratio},
                {"mean", detail::vector_to_json(f.pca->mean)},
                {"components", detail::matrix_to_json(f.pca->components)},
                {"explained_variance", f.pca->explained_variance},
                {"explained_variance_ratio", f.pca->explained_variance_ratio}};
  }
  if (f.kmeans) {
    j["kmeans"] = {{"centers", detail::matrix_to_json(f.kmeans->centers)},
                   {"inertia", f.kmeans->inertia},
                   {"iterations", f.kmeans->iterations}};
  }
  if (!f.mask.empty()) j["mask"] = f.mask;
  return j;
}

inline FittedFeatures features_from_json(const Json& j) {
  FittedFeatures f;
  try {
    f.spec.unit = ngram_unit_from_string(j.at("unit").get<std::string>());
    f.spec.n = j.at("n").get<std::size_t>();
    f.spec.tfidf = j.at("tfidf").get<bool>();
    f.spec.min_df = j.at("min_df").get<std::size_t>();
    f.spec.pca_ratio = j.at("pca_ratio").get<double>();
    f.spec.kmeans_k = j.at("kmeans_k").get<std::size_t>();
    f.spec.cluster_features = cluster_mode_from_string(j.at("cluster_features").get<std::string>());
    f.spec.selection = j.at("selection").get<bool>();
    f.spec.selection_trees = j.at("selection_trees").get<std::size_t>();
    const Json& v = j.at("vocabulary");
    f.vocab.unit = f.spec.unit;
    f.vocab.n = f.spec.n;
    f.vocab.n_docs = v.at("n_docs").get<std::size_t>();
    f.vocab.names = v.at("names").get<std::vector<std::string>>();
    f.vocab.doc_freq = v.at("doc_freq").get<std::vector<std::size_t>>();
    if (f.vocab.names.size() != f.vocab.doc_freq.size()) {
      throw Error(ErrorKind::CorruptModel, "vocabulary names and frequencies differ in length");
    }
    for (std::size_t i = 0; i < f.vocab.names.size(); ++i) f.vocab.index.emplace(f.vocab.names[i], i);
    if (j.contains("pca")) {
      PcaModel p;
      const Json& pj = j.at("pca");
      p.target_ratio = pj.at("target_ratio").get<double>();
      p.mean = detail::vector_from_json(pj.at("mean"));
      p.components = detail::matrix_from_json(pj.at("components"));
      p.explained_variance = pj.at("explained_variance").get<std::vector<double>>();
      p.explained_variance_ratio = pj.at("explained_variance_ratio").get<std::vector<double>>();
      if (p.mean.size() != static_cast<Eigen::Index>(f.vocab.size()) ||
          (p.components.rows() > 0 && p.components.cols() != p.mean.size())) {
        throw Error(ErrorKind::CorruptModel, "PCA shape does not match the vocabulary");
      }
      f.pca = std::move(p);
    }
    if (j.contains("kmeans")) {
      KMeansModel k;
      k.centers = detail::matrix_from_json(j.at("kmeans").at("centers"));
      k.inertia = j.at("kmeans").at("inertia").get<double>();
      k.iterations = j.at("kmeans").at("iterations").get<std::size_t>();
      f.kmeans = std::move(k);
    }
    if (j.contains("mask")) f.mask = j.at("mask").get<std::vector<bool>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::CorruptModel, std::string("malformed feature section: ") + e.what());
  }
  return f;
}

/// Raw text in, scores out.
struct PipelineModel {
  TextOptions text;
  FittedFeatures features;
  TrainedModel model;
  std::string config_hash;
  std::uint64_t seed = 0;

  Matrix featurize(const Dataset& ds) const { return features.transform(TextPipeline(text)(ds)); }
};

inline Json text_options_to_json(const TextOptions& t) {
  return Json{{"stem", t.stem},
              {"remove_stopwords", t.remove_stopwords},
              {"fenglish", t.fenglish},
              {"normalization_rules", t.normalization_rules},
              {"affixes", t.affixes},
              {"stopwords", t.stopwords},
              {"stem_rules", t.stem_rules},
              {"fenglish_table", t.fenglish_table}};
}

inline TextOptions text_options_from_json(const Json& j) {
  TextOptions t;
  t.stem = j.value("stem", t.stem);
  t.remove_stopwords = j.value("remove_stopwords", t.remove_stopwords);
  t.fenglish = j.value("fenglish", t.fenglish);
  t.normalization_rules = j.value("normalization_rules", t.normalization_rules);
  t.affixes = j.value("affixes", t.affixes);
  t.stopwords = j.value("stopwords", t.stopwords);
  t.stem_rules = j.value("stem_rules", t.stem_rules);
  t.fenglish_table = j.value("fenglish_table", t.fenglish_table);
  return t;
}

/// The model document plus the text options and fitted features needed to score raw text.
inline Json pipeline_to_json(const PipelineModel& p) {
  Json j = model_to_json(p.model);
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  j["text"] = text_options_to_json(p.text);
  j["features"] = features_to_json(p.features);
  return j;
}

inline void save_pipeline(const PipelineModel& p, const std::string& path) {
  write_text(path, pipeline_to_json(p).dump(1) + "\n");
}

inline PipelineModel load_pipeline(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(ss.str());
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::CorruptModel, path + ": " + e.what());
  }
  PipelineModel p;
  p.model = model_from_json(doc);
  if (!doc.contains("features")) throw Error(ErrorKind::CorruptModel, path + ": no feature section");
  p.features = features_from_json(doc.at("features"));
  p.text = text_options_from_json(doc.value("text", Json::object()));
  p.config_hash = doc.value("config_hash", std::string());
  p.seed = doc.value("seed", std::uint64_t{0});
  return p;
}

inline Json metrics_to_json(const EvalMetrics& m) {
  Json j{{"tp", m.counts.tp},
         {"fp", m.counts.fp},
         {"tn", m.counts.tn},
         {"fn", m.counts.fn},
         {"precision", m.metrics.precision},
         {"recall", m.metrics.recall},
         {"f1", m.metrics.f1},
         {"accuracy", m.metrics.accuracy},
         {"auc", m.auc ? Json(*m.auc) : Json(nullptr)}};
  Json degenerate = Json::array();
  if (m.metrics.precision_degenerate) degenerate.push_back("precision");
  if (m.metrics.recall_degenerate) degenerate.push_back("recall");
  if (m.metrics.f1_degenerate) degenerate.push_back("f1");
  if (m.metrics.accuracy_degenerate) degenerate.push_back("accuracy");
  j["degenerate"] = degenerate;
  return j;
}

inline Json summary_to_json(const MetricSummary& s) { return Json{{"mean", s.mean}, {"std", s.std}, {"n", s.n}}; }

inline Json cv_to_json(const CvResult& cv) {
  Json folds = Json::array();
  for (std::size_t f = 0; f < cv.per_fold.size(); ++f) {
    Json m = metrics_to_json(cv.per_fold[f]);
    m["size"] = cv.fold_indices[f].size();
    folds.push_back(m);
  }
  return Json{{"k", cv.k},
              {"per_fold", folds},
              {"precision", summary_to_json(cv.precision)},
              {"recall", summary_to_json(cv.recall)},
              {"f1", summary_to_json(cv.f1)},
              {"accuracy", summary_to_json(cv.accuracy)},
              {"auc", summary_to_json(cv.auc)}};
}

inline Json curve_to_json(const LearningCurve& c) {
  Json pts = Json::array();
  for (const auto& p : c.points) {
    pts.push_back({{"fraction", p.fraction}, {"size", p.size}, {"train", p.train}, {"val", p.validation}, {"gap", p.gap()}});
  }
  return Json{{"metric", "f1"}, {"validation_size", c.validation_rows.size()}, {"points", pts}, {"mean_gap", c.mean_gap}};
}

namespace detail {

/// Re-raises with the stage name in front of the message.
template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const TargetUnreachableError&) {
    throw;
  } catch (const Error& e) {
    if (e.message().rfind("[", 0) == 0) throw;
    throw Error(e.kind(), std::string("[") + stage + "] " + e.message());
  }
}

inline PipelineModel fit_pipeline(const ExperimentConfig& c, const std::vector<TokenStream>& docs, const Labels& y,
                                  std::uint64_t seed) {
  PipelineModel p;
  p.text = c.text;
  p.seed = c.seed;
  p.config_hash = config_hash(c);
  auto [features, X] = staged("features", [&] { return fit_features(c.features, docs, y, seed); });
  p.features = std::move(features);
  p.model = staged("train", [&, &X = X] { return train(c.learner, X, y, derive_seed(seed, 7)); });
  return p;
}

inline EvalMetrics score_rows(const PipelineModel& p, const Matrix& X, const Labels& y) {
  return evaluate_scores(y, scores(p.model, X), threshold(p.model));
}

}  // namespace detail

/// Fits text features and the learner on `rows` of the tokenized corpus.
inline PipelineModel fit_on_rows(const ExperimentConfig& c, const std::vector<TokenStream>& docs, const Labels& y,
                                 const std::vector<std::size_t>& rows, std::uint64_t seed) {
  return detail::fit_pipeline(c, take(docs, rows), take(y, rows), seed);
}

/// k-fold cross-validation over `rows`, refitting every transform inside each fold.
inline CvResult cross_validate_documents(const ExperimentConfig& c, const std::vector<TokenStream>& docs,
                                         const Labels& y, const std::vector<std::size_t>& rows, std::size_t k,
                                         std::uint64_t seed) {
  const Labels yr = take(y, rows);
  return cross_validate(yr, k, seed, [&](const std::vector<std::size_t>& tr, const std::vector<std::size_t>& te) {
    std::vector<std::size_t> train_rows, test_rows;
    for (auto i : tr) train_rows.push_back(rows[i]);
    for (auto i : te) test_rows.push_back(rows[i]);
    const auto p = fit_on_rows(c, docs, y, train_rows, derive_seed(seed, 1000 + te.front()));
    return detail::score_rows(p, p.features.transform(take(docs, test_rows)), take(y, test_rows));
  });
}

/// Cross-validation on a ready feature matrix, for learners without text transforms.
inline CvResult cross_validate(const LearnerSpec& spec, const Matrix& X, const Labels& y, std::size_t k,
                               std::uint64_t seed) {
  if (X.rows() != static_cast<Eigen::Index>(y.size())) throw Error(ErrorKind::ShapeMismatch, "rows and labels differ");
  return cross_validate(y, k, seed, [&](const std::vector<std::size_t>& tr, const std::vector<std::size_t>& te) {
    const auto m = train(spec, take_rows(X, tr), take(y, tr), derive_seed(seed, 1000 + te.front()));
    return evaluate_scores(take(y, te), scores(m, take_rows(X, te)), threshold(m));
  });
}

/// Learning curve over `rows` with F1 as the metric; transforms refit per point.
inline LearningCurve learning_curve_documents(const ExperimentConfig& c, const std::vector<TokenStream>& docs,
                                              const Labels& y, const std::vector<std::size_t>& rows,
                                              const std::vector<double>& fractions, std::uint64_t seed) {
  const Labels yr = take(y, rows);
  auto curve = learning_curve(
      yr, fractions, seed,
      [&](const std::vector<std::size_t>& tr, const std::vector<std::size_t>& va) {
        std::vector<std::size_t> train_rows, val_rows;
        for (auto i : tr) train_rows.push_back(rows[i]);
        for (auto i : va) val_rows.push_back(rows[i]);
        const auto p = fit_on_rows(c, docs, y, train_rows, derive_seed(seed, 2000 + tr.size()));
        const auto f1 = [&](const std::vector<std::size_t>& rr) {
          return detail::score_rows(p, p.features.transform(take(docs, rr)), take(y, rr)).metrics.f1;
        };
        return std::make_pair(f1(train_rows), f1(val_rows));
      },
      c.eval.validation_fraction);
  for (auto& r : curve.validation_rows) r = rows[r];
  return curve;
}

struct ExperimentResult {
  Json report;
  PipelineModel model;
  RocCurve roc;
  std::optional<LearningCurve> curve;
};

inline Dataset dataset_for(const ExperimentConfig& c) {
  if (c.data.path.empty()) return generate_synthetic_corpus(c.data.synthetic_docs, c.seed, c.data.synthetic_noise);
  return load_dataset(c.data.path, c.data.load);
}

/// Tokenize, split, fit on train, evaluate on test, then cross-validate and
/// trace the learning curve on the train part. Writes nothing.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const Dataset& ds) {
  const std::string hash = config_hash(c);
  const TextPipeline text(c.text);
  const auto docs = detail::staged("tokenize", [&] { return text(ds); });
  const Labels y = ds.labels();
  const Split split = ds.split ? *ds.split : detail::staged("split", [&] {
    return *split_train_test(ds, c.eval.test_fraction, c.eval.stratified, derive_seed(c.seed, 1)).split;
  });

  ExperimentResult out;
  out.model = fit_on_rows(c, docs, y, split.train, derive_seed(c.seed, 2));
  const Matrix X_train = out.model.features.transform(take(docs, split.train));
  const Matrix X_test = out.model.features.transform(take(docs, split.test));
  const Labels y_train = take(y, split.train), y_test = take(y, split.test);

  const Vector test_scores = scores(out.model.model, X_test);
  const EvalMetrics test = evaluate_scores(y_test, test_scores, threshold(out.model.model));
  const EvalMetrics resub = detail::score_rows(out.model, X_train, y_train);
  out.roc = detail::staged("evaluate", [&] { return roc_auc(y_test, test_scores); });

  Json& r = out.report;
  r["config_hash"] = hash;
  r["seed"] = c.seed;
  r["preset"] = c.preset;
  r["dataset"] = {{"source", ds.source},
                  {"hash", ds.source_hash},
                  {"documents", ds.size()},
                  {"train", split.train.size()},
                  {"test", split.test.size()}};
  Json feat{{"unit", std::string(to_string(c.features.unit))},
            {"n", c.features.n},
            {"tfidf", c.features.tfidf},
            {"vocabulary_size", out.model.features.vocab.size()},
            {"dimensions", X_train.cols()}};
  if (const auto& pca = out.model.features.pca) {
    feat["pca"] = {{"target_ratio", pca->target_ratio}, {"components", pca->k()}, {"retained_ratio", pca->retained_ratio()}};
  }
  if (const auto& km = out.model.features.kmeans) {
    feat["kmeans"] = {{"k", km->k()},
                      {"inertia", km->inertia},
                      {"mode", std::string(to_string(c.features.cluster_features))}};
  }
  if (!out.model.features.mask.empty()) {
    feat["selection"] = {{"kept", std::count(out.model.features.mask.begin(), out.model.features.mask.end(), true)},
                         {"of", out.model.features.mask.size()}};
  }
  r["features"] = feat;
  r["learner"] = learner_spec_to_json(c.learner);
  r["threshold"] = threshold(out.model.model);
  r["test"] = metrics_to_json(test);
  r["train_resubstitution"] = metrics_to_json(resub);
  r["roc"] = {{"auc", out.roc.auc}, {"points", out.roc.points.size()}};

  if (c.eval.cv_folds >= 2) {
    r["train_cv"] = cv_to_json(detail::staged("cv", [&] {
      return cross_validate_documents(c, docs, y, split.train, c.eval.cv_folds, derive_seed(c.seed, 3));
    }));
  }
  if (!c.eval.curve_fractions.empty()) {
    out.curve = detail::staged("learning-curve", [&] {
      return learning_curve_documents(c, docs, y, split.train, c.eval.curve_fractions, derive_seed(c.seed, 4));
    });
    r["learning_curve"] = curve_to_json(*out.curve);
  }
  if (c.eval.tune_metric) {
    Json t{{"metric", std::string(to_string(*c.eval.tune_metric))}, {"target", c.eval.tune_target}, {"split", "test"}};
    try {
      const auto choice = tune_threshold(y_test, test_scores, *c.eval.tune_metric, c.eval.tune_target);
      t["threshold"] = choice.threshold;
      t["precision"] = choice.metrics.precision;
      t["recall"] = choice.metrics.recall;
    } catch (const TargetUnreachableError& e) {
      t["unreachable"] = true;
      t["best"] = e.best();
    }
    r["threshold_tradeoff"] = t;
  }
  return out;
}

struct GridAxis {
  /// Dotted config path, such as "learner.l2_lambda".
  std::string key;
  std::vector<Json> values;
};

struct GridCell {
  Json assignment;
  CvResult cv;
};

inline std::vector<Json> grid_assignments(const std::vector<GridAxis>& axes) {
  std::vector<Json> out{Json::object()};
  for (const auto& axis : axes) {
    if (axis.values.empty()) throw Error(ErrorKind::InvalidArgument, "grid axis '" + axis.key + "' has no values");
    std::vector<Json> next;
    for (const auto& partial : out) {
      for (const auto& v : axis.values) {
        Json a = partial;
        a[axis.key] = v;
        next.push_back(std::move(a));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Expands {"learner.epochs": 20} into {"learner": {"epochs": 20}}.
inline Json assignment_patch(const Json& assignment) {
  Json patch = Json::object();
  for (const auto& [key, value] : assignment.items()) {
    Json* node = &patch;
    std::size_t start = 0;
    for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
      node = &(*node)[key.substr(start, dot - start)];
    }
    (*node)[key.substr(start)] = value;
  }
  return patch;
}

/// Cross-validates every combination on `rows`; the best mean F1 comes first,
/// ties keeping grid order.
inline std::vector<GridCell> grid_search(const ExperimentConfig& base, const std::vector<GridAxis>& axes,
                                         const std::vector<TokenStream>& docs, const Labels& y,
                                         const std::vector<std::size_t>& rows, std::size_t k, std::uint64_t seed) {
  std::vector<GridCell> cells;
  for (const auto& a : grid_assignments(axes)) {
    Json patch = assignment_patch(a);
    if (patch.contains("learner")) {
      Json learner = learner_spec_to_json(base.learner);
      learner.merge_patch(patch["learner"]);
      patch["learner"] = learner;
    }
    const ExperimentConfig c = config_from_json(patch, base);
    cells.push_back({a, cross_validate_documents(c, docs, y, rows, k, seed)});
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const GridCell& a, const GridCell& b) { return a.cv.f1.mean > b.cv.f1.mean; });
  return cells;
}

inline std::string artifact_comment(const ExperimentConfig& c) {
  return "config_hash=" + config_hash(c) + " seed=" + std::to_string(c.seed);
}

/// model.json, report.json, roc.csv, learning_curve.csv, config.resolved.json
/// and, when enabled, roc.svg and learning_curve.svg.
inline void write_experiment(const ExperimentConfig& c, const ExperimentResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  Json resolved = config_to_json(c);
  resolved["config_hash"] = config_hash(c);
  write_text((root / "config.resolved.json").string(), resolved.dump(2) + "\n");
  save_pipeline(result.model, (root / "model.json").string());
  write_text((root / "report.json").string(), result.report.dump(2) + "\n");
  write_roc_csv(result.roc, (root / "roc.csv").string(), artifact_comment(c));
  LearningCurve empty;
  write_learning_curve_csv(result.curve ? *result.curve : empty, (root / "learning_curve.csv").string(),
                           artifact_comment(c));
  if (c.eval.svg) {
    ChartSeries roc{"AUC " + detail::format_double(result.roc.auc), {}, {}};
    for (const auto& p : result.roc.points) roc.x.push_back(p.fpr), roc.y.push_back(p.tpr);
    write_text((root / "roc.svg").string(),
               svg_line_chart("ROC " + artifact_comment(c), "false positive rate", "true positive rate", {roc}));
    if (result.curve) {
      ChartSeries tr{"train", {}, {}}, va{"validation", {}, {}};
      for (const auto& p : result.curve->points) {
        tr.x.push_back(static_cast<double>(p.size)), tr.y.push_back(p.train);
        va.x.push_back(static_cast<double>(p.size)), va.y.push_back(p.validation);
      }
      write_text((root / "learning_curve.svg").string(),
                 svg_line_chart("Learning curve " + artifact_comment(c), "training documents", "F1", {tr, va}));
    }
  }
}

}  // namespace parsitext
