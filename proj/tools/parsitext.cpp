#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "parsitext/parsitext.hpp"

namespace pt = parsitext;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

// Flags shared by the commands that build an ExperimentConfig. Each one is
// applied only when given, so it overrides the --config file.
struct ConfigFlags {
  std::string data, format, text_column, label_column, id_column;
  std::string table, affixes, stopwords, stem_rules;
  bool no_stem = false, keep_stopwords = false, fenglish = false;
  std::string unit, cluster_features, learner;
  std::size_t n = 0, min_df = 0, kmeans = 0;
  std::optional<bool> tfidf, select;
  std::optional<double> pca;

  void add_text(CLI::App& app) {
    app.add_option("--table", table, "normalization rules file");
    app.add_option("--affixes", affixes, "affix list used for ZWNJ insertion");
    app.add_option("--stopwords", stopwords, "stopword list, one per line");
    app.add_option("--stem-rules", stem_rules, "suffix rules, SUFFIX<TAB>MINLEN");
    app.add_flag("--no-stem", no_stem, "keep inflected forms");
    app.add_flag("--keep-stopwords", keep_stopwords, "do not drop stopwords");
    app.add_flag("--fenglish", fenglish, "transliterate Latin-script Persian first");
  }

  void add_data(CLI::App& app) {
    app.add_option("--data", data, "UTF-8 TSV/CSV with text and label columns (default: synthetic corpus)");
    app.add_option("--format", format, "auto, tsv or csv")->check(CLI::IsMember({"auto", "tsv", "csv"}));
    app.add_option("--text-column", text_column);
    app.add_option("--label-column", label_column);
    app.add_option("--id-column", id_column);
  }

  void add_features(CLI::App& app) {
    app.add_option("--unit", unit, "word or char")->check(CLI::IsMember({"word", "char"}));
    app.add_option("--n", n, "n-gram order")->check(CLI::PositiveNumber);
    app.add_option("--min-df", min_df, "minimum document frequency")->check(CLI::PositiveNumber);
    app.add_flag("--tfidf,!--counts", tfidf, "TF-IDF weighting (default) or raw counts");
    app.add_option("--pca", pca, "retained variance ratio, 0 disables")->check(CLI::Range(0.0, 1.0));
    app.add_option("--kmeans", kmeans, "cluster count")->check(CLI::PositiveNumber);
    app.add_option("--cluster-features", cluster_features, "none, distances, centers or combined")
        ->check(CLI::IsMember({"none", "distances", "centers", "combined"}));
    app.add_flag("--select,!--no-select", select, "forest-importance feature selection");
  }

  void add_learner(CLI::App& app) {
    app.add_option("--learner", learner,
                   "svm, logistic, mnb, gnb, forest, lda, stump, voting, pasting or adaboost");
  }

  pt::Json patch(const pt::ExperimentConfig& base) const {
    pt::Json p = pt::Json::object();
    auto set = [&](const char* section, const char* key, const pt::Json& v) { p[section][key] = v; };
    if (!data.empty()) set("data", "path", data);
    if (!format.empty()) set("data", "format", format);
    if (!text_column.empty()) set("data", "text_column", text_column);
    if (!label_column.empty()) set("data", "label_column", label_column);
    if (!id_column.empty()) set("data", "id_column", id_column);
    if (!table.empty()) set("text", "normalization_rules", table);
    if (!affixes.empty()) set("text", "affixes", affixes);
    if (!stopwords.empty()) set("text", "stopwords", stopwords);
    if (!stem_rules.empty()) set("text", "stem_rules", stem_rules);
    if (no_stem) set("text", "stem", false);
    if (keep_stopwords) set("text", "remove_stopwords", false);
    if (fenglish) set("text", "fenglish", true);
    if (!unit.empty()) set("features", "unit", unit);
    if (n) set("features", "n", n);
    if (min_df) set("features", "min_df", min_df);
    if (tfidf) set("features", "tfidf", *tfidf);
    if (pca) set("features", "pca_ratio", *pca);
    if (kmeans) {
      set("features", "kmeans_k", kmeans);
      if (cluster_features.empty() && base.features.cluster_features == pt::ClusterMode::None) {
        set("features", "cluster_features", "distances");
      }
    }
    if (!cluster_features.empty()) set("features", "cluster_features", cluster_features);
    if (select) set("features", "selection", *select);
    if (!learner.empty()) {
      pt::Json l = pt::learner_spec_to_json(base.learner);
      l["kind"] = learner;
      p["learner"] = l;
    }
    return p;
  }
};

pt::ExperimentConfig resolve(const Globals& g, const ConfigFlags& flags, pt::Json extra = pt::Json::object()) {
  pt::ExperimentConfig base = g.config.empty() ? pt::paper_default_config() : pt::load_config(g.config);
  pt::Json p = flags.patch(base);
  p.merge_patch(extra);
  if (g.seed) p["seed"] = *g.seed;
  return pt::config_from_json(p, base);
}

void print(const pt::Json& j) { std::cout << j.dump(2) << '\n'; }

fs::path out_dir(const Globals& g, const std::string& fallback = {}) {
  fs::path dir = g.out.empty() ? fs::path(fallback) : fs::path(g.out);
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw pt::Error(pt::ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  }
  return dir;
}

template <class Fn>
void for_each_line(Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(std::cin, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!pt::utf8::is_valid(line)) throw pt::RowError(pt::ErrorKind::MalformedUtf8, number, "input is not valid UTF-8");
    fn(line);
  }
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

std::vector<pt::GridAxis> parse_grid(const std::vector<std::string>& specs) {
  std::vector<pt::GridAxis> axes;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw pt::Error(pt::ErrorKind::InvalidArgument, "grid axis '" + spec + "' must look like key=v1,v2");
    }
    pt::GridAxis axis{spec.substr(0, eq), {}};
    std::stringstream values(spec.substr(eq + 1));
    for (std::string v; std::getline(values, v, ',');) {
      const auto parsed = pt::Json::parse(v, nullptr, false);
      axis.values.push_back(parsed.is_discarded() ? pt::Json(v) : parsed);
    }
    axes.push_back(std::move(axis));
  }
  return axes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persian sentiment classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--config", g.config, "key-value JSON patched onto the paper-default preset");
  app.add_option("--out", g.out, "output directory");

  // normalize
  auto* normalize_cmd = app.add_subcommand("normalize", "normalize UTF-8 lines from stdin");
  ConfigFlags norm_flags;
  normalize_cmd->add_option("--table", norm_flags.table, "normalization rules file");
  normalize_cmd->add_option("--affixes", norm_flags.affixes, "affix list used for ZWNJ insertion");
  normalize_cmd->add_flag("--fenglish", norm_flags.fenglish, "transliterate Latin-script Persian first");
  bool show_rules = false;
  normalize_cmd->add_flag("--rules", show_rules, "append the applied rules after a tab");
  normalize_cmd->callback([&] {
    const auto c = resolve(g, norm_flags);
    const pt::TextPipeline text(c.text);
    for_each_line([&](const std::string& line) {
      const auto result = pt::normalize(text.prepare(line), *text.preprocessor().table);
      std::cout << result.text;
      if (show_rules) {
        std::cout << '\t';
        for (std::size_t i = 0; i < result.applied_rules.size(); ++i) {
          std::cout << (i ? "," : "") << result.applied_rules[i];
        }
      }
      std::cout << '\n';
    });
  });

  // tokenize
  auto* tokenize_cmd = app.add_subcommand("tokenize", "tokenize UTF-8 lines from stdin, one space-joined line each");
  ConfigFlags tok_flags;
  tok_flags.add_text(*tokenize_cmd);
  tokenize_cmd->callback([&] {
    const auto c = resolve(g, tok_flags);
    const pt::TextPipeline text(c.text);
    for_each_line([&](const std::string& line) {
      const auto stream = text(line);
      for (std::size_t i = 0; i < stream.tokens.size(); ++i) std::cout << (i ? " " : "") << stream.tokens[i];
      std::cout << '\n';
    });
  });

  // featurize
  auto* featurize_cmd = app.add_subcommand("featurize", "fit features on a dataset and dump the matrix");
  ConfigFlags feat_flags;
  feat_flags.add_data(*featurize_cmd);
  feat_flags.add_text(*featurize_cmd);
  feat_flags.add_features(*featurize_cmd);
  featurize_cmd->callback([&] {
    // Plain featurization keeps the sparse matrix unless PCA or clustering is asked for.
    pt::Json extra = pt::Json::object();
    if (!feat_flags.pca) extra["features"]["pca_ratio"] = 0.0;
    const auto c = resolve(g, feat_flags, extra);
    const auto ds = pt::dataset_for(c);
    const auto docs = pt::TextPipeline(c.text)(ds);
    const auto fitted = pt::fit_features(c.features, docs, ds.labels(), c.seed).first;
    const auto fm = fitted.transform_features(docs);
    if (g.out.empty()) {
      pt::write_dump(std::cout, fm);
      return;
    }
    const auto dir = out_dir(g);
    std::ofstream dump(dir / "features.txt", std::ios::binary);
    pt::write_dump(dump, fm);
    std::ofstream names(dir / "vocabulary.txt", std::ios::binary);
    for (const auto& name : fitted.vocab.names) names << name << '\n';
    if (!dump || !names) throw pt::Error(pt::ErrorKind::Io, "cannot write into " + dir.string());
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "fit features and a learner on a whole dataset");
  ConfigFlags train_flags;
  train_flags.add_data(*train_cmd);
  train_flags.add_text(*train_cmd);
  train_flags.add_features(*train_cmd);
  train_flags.add_learner(*train_cmd);
  train_cmd->callback([&] {
    const auto c = resolve(g, train_flags);
    const auto ds = pt::dataset_for(c);
    const auto docs = pt::TextPipeline(c.text)(ds);
    const auto y = ds.labels();
    const auto model = pt::fit_on_rows(c, docs, y, all_rows(ds.size()), pt::derive_seed(c.seed, 2));
    const auto X = model.features.transform(docs);
    const auto path = out_dir(g, ".") / "model.json";
    pt::save_pipeline(model, path.string());
    print({{"model", path.string()},
           {"config_hash", model.config_hash},
           {"seed", c.seed},
           {"documents", ds.size()},
           {"dimensions", X.cols()},
           {"train_resubstitution",
            pt::metrics_to_json(pt::evaluate_scores(y, pt::scores(model.model, X), pt::threshold(model.model)))}});
  });

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a dataset with a saved model");
  ConfigFlags eval_flags;
  std::string eval_model;
  std::optional<double> eval_threshold;
  evaluate_cmd->add_option("--model", eval_model, "model.json written by train or run")->required();
  eval_flags.add_data(*evaluate_cmd);
  evaluate_cmd->add_option("--threshold", eval_threshold, "decision cut, default the model's own");
  evaluate_cmd->callback([&] {
    const auto c = resolve(g, eval_flags);
    const auto model = pt::load_pipeline(eval_model);
    const auto ds = pt::dataset_for(c);
    const auto y = ds.labels();
    const pt::Vector s = pt::scores(model.model, model.featurize(ds));
    const double cut = eval_threshold.value_or(pt::threshold(model.model));
    pt::Json report{{"model", eval_model},
                    {"model_config_hash", model.config_hash},
                    {"dataset", {{"source", ds.source}, {"hash", ds.source_hash}, {"documents", ds.size()}}},
                    {"threshold", cut},
                    {"metrics", pt::metrics_to_json(pt::evaluate_scores(y, s, cut))}};
    if (!g.out.empty()) {
      const auto dir = out_dir(g);
      pt::write_roc_csv(pt::roc_auc(y, s), (dir / "roc.csv").string(),
                        "model_config_hash=" + model.config_hash + " seed=" + std::to_string(model.seed));
      pt::write_text((dir / "evaluation.json").string(), report.dump(2) + "\n");
    }
    print(report);
  });

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "stratified k-fold cross-validation, optionally over a grid");
  ConfigFlags cv_flags;
  std::size_t folds = 0;
  std::vector<std::string> grid;
  cv_flags.add_data(*cv_cmd);
  cv_flags.add_text(*cv_cmd);
  cv_flags.add_features(*cv_cmd);
  cv_flags.add_learner(*cv_cmd);
  cv_cmd->add_option("--folds", folds, "fold count (default from config)");
  cv_cmd->add_option("--grid", grid, "key=v1,v2 axis such as learner.l2_lambda=1e-5,1e-4; repeatable");
  cv_cmd->callback([&] {
    pt::Json extra = pt::Json::object();
    if (folds) extra["eval"]["cv_folds"] = folds;
    const auto c = resolve(g, cv_flags, extra);
    if (c.eval.cv_folds < 2) throw pt::Error(pt::ErrorKind::InvalidK, "cross-validation needs at least 2 folds");
    const auto ds = pt::dataset_for(c);
    const auto docs = pt::TextPipeline(c.text)(ds);
    const auto rows = all_rows(ds.size());
    const auto seed = pt::derive_seed(c.seed, 3);
    pt::Json report{{"config_hash", pt::config_hash(c)}, {"seed", c.seed}, {"documents", ds.size()}};
    if (grid.empty()) {
      report["cv"] = pt::cv_to_json(pt::cross_validate_documents(c, docs, ds.labels(), rows, c.eval.cv_folds, seed));
    } else {
      pt::Json cells = pt::Json::array();
      for (const auto& cell :
           pt::grid_search(c, parse_grid(grid), docs, ds.labels(), rows, c.eval.cv_folds, seed)) {
        cells.push_back({{"assignment", cell.assignment},
                         {"f1", pt::summary_to_json(cell.cv.f1)},
                         {"precision", pt::summary_to_json(cell.cv.precision)},
                         {"recall", pt::summary_to_json(cell.cv.recall)},
                         {"auc", pt::summary_to_json(cell.cv.auc)}});
      }
      report["grid"] = cells;
      report["best"] = cells.front()["assignment"];
    }
    if (!g.out.empty()) pt::write_text((out_dir(g) / "cv.json").string(), report.dump(2) + "\n");
    print(report);
  });

  // learning-curve
  auto* curve_cmd = app.add_subcommand("learning-curve", "train and validation F1 against training size");
  ConfigFlags curve_flags;
  std::vector<double> fractions;
  curve_flags.add_data(*curve_cmd);
  curve_flags.add_text(*curve_cmd);
  curve_flags.add_features(*curve_cmd);
  curve_flags.add_learner(*curve_cmd);
  curve_cmd->add_option("--fractions", fractions, "training fractions in (0, 1]")->delimiter(',');
  curve_cmd->callback([&] {
    pt::Json extra = pt::Json::object();
    if (!fractions.empty()) extra["eval"]["curve_fractions"] = fractions;
    const auto c = resolve(g, curve_flags, extra);
    const auto ds = pt::dataset_for(c);
    const auto docs = pt::TextPipeline(c.text)(ds);
    const auto curve = pt::learning_curve_documents(c, docs, ds.labels(), all_rows(ds.size()),
                                                    c.eval.curve_fractions, pt::derive_seed(c.seed, 4));
    if (!g.out.empty()) {
      const auto dir = out_dir(g);
      pt::write_learning_curve_csv(curve, (dir / "learning_curve.csv").string(), pt::artifact_comment(c));
      pt::ChartSeries tr{"train", {}, {}}, va{"validation", {}, {}};
      for (const auto& p : curve.points) {
        tr.x.push_back(static_cast<double>(p.size)), tr.y.push_back(p.train);
        va.x.push_back(static_cast<double>(p.size)), va.y.push_back(p.validation);
      }
      pt::write_text((dir / "learning_curve.svg").string(),
                     pt::svg_line_chart("Learning curve " + pt::artifact_comment(c), "training documents", "F1",
                                        {tr, va}));
    }
    pt::Json report = pt::curve_to_json(curve);
    report["config_hash"] = pt::config_hash(c);
    report["seed"] = c.seed;
    print(report);
  });

  // tune-threshold
  auto* tune_cmd = app.add_subcommand("tune-threshold", "pick the decision cut meeting a recall or precision target");
  ConfigFlags tune_flags;
  std::string tune_model, tune_metric = "recall";
  double tune_target = 0.91;
  tune_cmd->add_option("--model", tune_model, "model.json written by train or run")->required();
  tune_flags.add_data(*tune_cmd);
  tune_cmd->add_option("--metric", tune_metric, "recall or precision")->check(CLI::IsMember({"recall", "precision"}));
  tune_cmd->add_option("--target", tune_target, "required metric value")->check(CLI::Range(0.0, 1.0));
  int tune_status = 0;
  tune_cmd->callback([&] {
    const auto c = resolve(g, tune_flags);
    auto model = pt::load_pipeline(tune_model);
    const auto ds = pt::dataset_for(c);
    const pt::Vector s = pt::scores(model.model, model.featurize(ds));
    pt::Json report{{"metric", tune_metric}, {"target", tune_target}, {"documents", ds.size()}};
    try {
      const auto choice = pt::tune_threshold(ds.labels(), s, pt::tune_metric_from_string(tune_metric), tune_target);
      report["threshold"] = choice.threshold;
      report["metrics"] = pt::metrics_to_json(pt::evaluate_scores(ds.labels(), s, choice.threshold));
      if (!g.out.empty()) {
        pt::set_threshold(model.model, choice.threshold);
        pt::save_pipeline(model, (out_dir(g) / "model.json").string());
      }
    } catch (const pt::TargetUnreachableError& e) {
      report["unreachable"] = true;
      report["best"] = e.best();
      std::cerr << "parsitext tune-threshold: " << e.what() << '\n';
      tune_status = 3;
    }
    print(report);
  });

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic corpus as TSV");
  std::optional<std::size_t> synth_n;
  std::optional<double> synth_noise;
  synth_cmd->add_option("--n", synth_n, "document count, at least 20");
  synth_cmd->add_option("--noise", synth_noise, "share of flipped labels")->check(CLI::Range(0.0, 0.5));
  synth_cmd->callback([&] {
    pt::Json extra = pt::Json::object();
    if (synth_n) extra["data"]["synthetic_docs"] = *synth_n;
    if (synth_noise) extra["data"]["synthetic_noise"] = *synth_noise;
    const auto c = resolve(g, ConfigFlags{}, extra);
    const auto ds = pt::generate_synthetic_corpus(c.data.synthetic_docs, c.seed, c.data.synthetic_noise);
    if (g.out.empty()) {
      std::cout << "id\ttext\tlabel\n";
      for (const auto& d : ds.documents) std::cout << d.id << '\t' << d.text << '\t' << d.label << '\n';
      return;
    }
    const auto path = out_dir(g) / "corpus.tsv";
    pt::write_dataset_tsv(ds, path.string());
    std::cerr << "wrote " << ds.size() << " documents to " << path.string() << " (hash " << ds.source_hash << ")\n";
  });

  // run
  auto* run_cmd = app.add_subcommand("run", "full experiment: split, fit, evaluate, cross-validate, learning curve");
  ConfigFlags run_flags;
  run_flags.add_data(*run_cmd);
  run_flags.add_text(*run_cmd);
  run_flags.add_features(*run_cmd);
  run_flags.add_learner(*run_cmd);
  run_cmd->callback([&] {
    const auto c = resolve(g, run_flags);
    const auto ds = pt::detail::staged("load", [&] { return pt::dataset_for(c); });
    const auto result = pt::run_experiment(c, ds);
    const auto dir = out_dir(g, "parsitext-run");
    pt::write_experiment(c, result, dir.string());
    const auto& r = result.report;
    std::cout << "run " << r["config_hash"].get<std::string>() << " seed " << c.seed << ": test F1 "
              << pt::detail::format_double(r["test"]["f1"].get<double>()) << ", AUC "
              << pt::detail::format_double(r["roc"]["auc"].get<double>()) << " -> " << dir.string() << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const pt::Error& e) {
    const auto* cmd = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    std::cerr << "parsitext " << (cmd ? cmd->get_name() : std::string()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "parsitext: " << e.what() << '\n';
    return 1;
  }
  return tune_status;
}
