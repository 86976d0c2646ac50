#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "parsitext/ensemble.hpp"
#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"

namespace parsitext {

using Json = nlohmann::ordered_json;

inline constexpr int kModelSchemaVersion = 1;

namespace detail {

inline Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Vector vector_from_json(const Json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
  return v;
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

inline Matrix matrix_from_json(const Json& rows) {
  if (rows.empty()) return Matrix(0, 0);
  const auto cols = rows.at(0).size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows.at(r).size() != cols) throw Error(ErrorKind::CorruptModel, "ragged matrix");
    m.row(static_cast<Eigen::Index>(r)) = vector_from_json(rows.at(r)).transpose();
  }
  return m;
}

inline Json tree_to_json(const DecisionTree& t) {
  Json feature = Json::array(), threshold = Json::array(), left = Json::array(), right = Json::array(),
       c0 = Json::array(), c1 = Json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    c0.push_back(n.counts[0]);
    c1.push_back(n.counts[1]);
  }
  return Json{{"feature", feature}, {"threshold", threshold}, {"left", left},
              {"right", right},     {"count0", c0},           {"count1", c1}};
}

inline DecisionTree tree_from_json(const Json& j, Eigen::Index n_features) {
  DecisionTree t;
  const auto n = j.at("feature").size();
  for (const char* key : {"threshold", "left", "right", "count0", "count1"}) {
    if (j.at(key).size() != n) throw Error(ErrorKind::CorruptModel, "tree arrays differ in length");
  }
  const int size = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode node;
    node.feature = j.at("feature").at(i).get<int>();
    node.threshold = j.at("threshold").at(i).get<double>();
    node.left = j.at("left").at(i).get<int>();
    node.right = j.at("right").at(i).get<int>();
    node.counts = {j.at("count0").at(i).get<double>(), j.at("count1").at(i).get<double>()};
    const bool leaf = node.feature < 0;
    const int self = static_cast<int>(i);
    if (!leaf && (node.feature >= n_features || node.left <= self || node.right <= self || node.left >= size ||
                  node.right >= size)) {
      throw Error(ErrorKind::CorruptModel, "tree node " + std::to_string(i) + " is inconsistent");
    }
    t.nodes.push_back(node);
  }
  if (t.nodes.empty()) throw Error(ErrorKind::CorruptModel, "empty tree");
  return t;
}

}  // namespace detail

inline Json learner_spec_to_json(const LearnerSpec& s) {
  Json j{{"kind", std::string(to_string(s.kind))}};
  switch (s.kind) {
    case LearnerKind::Svm:
    case LearnerKind::Logistic:
      j["l2_lambda"] = s.l2_lambda;
      j["epochs"] = s.epochs;
      j["eta0"] = s.eta0;
      break;
    case LearnerKind::Mnb:
      j["alpha"] = s.alpha;
      j["shift_negative"] = s.shift_negative;
      break;
    case LearnerKind::Gnb:
      j["var_floor"] = s.var_floor;
      break;
    case LearnerKind::Forest:
      j["n_trees"] = s.n_trees;
      j["max_depth"] = s.max_depth;
      j["max_features"] = s.max_features;
      j["bootstrap"] = s.bootstrap;
      break;
    case LearnerKind::Lda:
      j["ridge"] = s.ridge;
      break;
    case LearnerKind::Stump:
      break;
    case LearnerKind::Voting: {
      Json members = Json::array();
      for (const auto& m : s.members.empty() ? default_voting_roster() : s.members) {
        members.push_back(learner_spec_to_json(m));
      }
      j["members"] = members;
      break;
    }
    case LearnerKind::Pasting:
      j["n_estimators"] = s.n_estimators;
      j["sample_size"] = s.sample_size;
      j["base"] = learner_spec_to_json(s.members.empty() ? LearnerSpec::of(LearnerKind::Voting) : s.members.front());
      break;
    case LearnerKind::AdaBoost:
      j["n_rounds"] = s.n_rounds;
      break;
  }
  return j;
}

/// Missing keys keep their defaults.
inline LearnerSpec learner_spec_from_json(const Json& j) {
  LearnerSpec s;
  try {
    if (j.is_string()) return LearnerSpec::of(learner_kind_from_string(j.get<std::string>()));
    s.kind = learner_kind_from_string(j.value("kind", std::string("svm")));
    s.l2_lambda = j.value("l2_lambda", s.l2_lambda);
    s.epochs = j.value("epochs", s.epochs);
    s.eta0 = j.value("eta0", s.eta0);
    s.alpha = j.value("alpha", s.alpha);
    s.shift_negative = j.value("shift_negative", s.shift_negative);
    s.var_floor = j.value("var_floor", s.var_floor);
    s.n_trees = j.value("n_trees", s.n_trees);
    s.max_depth = j.value("max_depth", s.max_depth);
    s.max_features = j.value("max_features", s.max_features);
    s.bootstrap = j.value("bootstrap", s.bootstrap);
    s.ridge = j.value("ridge", s.ridge);
    s.n_estimators = j.value("n_estimators", s.n_estimators);
    s.sample_size = j.value("sample_size", s.sample_size);
    s.n_rounds = j.value("n_rounds", s.n_rounds);
    if (j.contains("members")) {
      for (const auto& m : j.at("members")) s.members.push_back(learner_spec_from_json(m));
    }
    if (j.contains("base")) s.members = {learner_spec_from_json(j.at("base"))};
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad learner spec: ") + e.what());
  }
  return s;
}

inline Json model_to_json(const TrainedModel& m) {
  Json doc{{"schema_version", kModelSchemaVersion}, {"model_kind", std::string(to_string(m.kind))}};
  Json hyper = Json::object(), params = Json::object();
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          hyper = {{"loss", std::string(to_string(model.params.loss))},
                   {"l2_lambda", model.params.l2_lambda},
                   {"epochs", model.params.epochs},
                   {"eta0", model.params.eta0},
                   {"seed", model.params.seed}};
          params = {{"weights", detail::vector_to_json(model.weights)},
                    {"bias", model.bias},
                    {"threshold", model.threshold},
                    {"margin_scale", model.margin_scale}};
        } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          hyper = {{"variant", std::string(to_string(model.variant))},
                   {"alpha", model.alpha},
                   {"var_floor", model.var_floor}};
          params = {{"class_log_prior", {model.class_log_prior[0], model.class_log_prior[1]}},
                    {"threshold", model.threshold}};
          if (model.variant == NbVariant::Multinomial) {
            params["feature_log_prob"] = detail::matrix_to_json(model.feature_log_prob);
            params["feature_offset"] = detail::vector_to_json(model.feature_offset);
          } else {
            params["means"] = detail::matrix_to_json(model.means);
            params["variances"] = detail::matrix_to_json(model.variances);
          }
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          hyper = {{"tree_kind", std::string(to_string(model.kind))},
                   {"n_trees", model.trees.size()},
                   {"max_depth", model.max_depth},
                   {"max_features", model.max_features},
                   {"bootstrap", model.bootstrap}};
          Json trees = Json::array();
          for (const auto& t : model.trees) trees.push_back(detail::tree_to_json(t));
          params = {{"n_features", model.n_features},
                    {"threshold", model.threshold},
                    {"feature_importances", model.feature_importances},
                    {"trees", trees}};
        } else if constexpr (std::is_same_v<T, LdaModel>) {
          hyper = {{"ridge", model.ridge}};
          params = {{"mean0", detail::vector_to_json(model.means[0])},
                    {"mean1", detail::vector_to_json(model.means[1])},
                    {"w", detail::vector_to_json(model.w)},
                    {"projection_threshold", model.projection_threshold},
                    {"projected_std", model.projected_std},
                    {"threshold", model.threshold}};
        } else {
          hyper = {{"n_members", model.members.size()}, {"sample_size", model.sample_size}};
          Json members = Json::array();
          for (const auto& member : model.members) members.push_back(model_to_json(member));
          params = {{"members", members},
                    {"member_weights", model.member_weights},
                    {"sample_indices", model.sample_indices},
                    {"round_errors", model.round_errors},
                    {"threshold", model.threshold}};
        }
      },
      m.model);
  doc["hyperparams"] = hyper;
  doc["parameters"] = params;
  return doc;
}

inline TrainedModel model_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw Error(ErrorKind::CorruptModel, "not a model document");
  }
  if (!doc.at("schema_version").is_number_integer() || doc.at("schema_version").get<int>() != kModelSchemaVersion) {
    throw Error(ErrorKind::UnknownSchema, "unsupported schema_version " + doc.at("schema_version").dump());
  }
  try {
    TrainedModel m;
    m.kind = learner_kind_from_string(doc.at("model_kind").get<std::string>());
    const Json& h = doc.at("hyperparams");
    const Json& p = doc.at("parameters");
    switch (m.kind) {
      case LearnerKind::Svm:
      case LearnerKind::Logistic: {
        LinearModel lm;
        lm.params.loss = h.at("loss").get<std::string>() == "logistic" ? LinearLoss::Logistic : LinearLoss::Hinge;
        lm.params.l2_lambda = h.at("l2_lambda").get<double>();
        lm.params.epochs = h.at("epochs").get<std::size_t>();
        lm.params.eta0 = h.at("eta0").get<double>();
        lm.params.seed = h.at("seed").get<std::uint64_t>();
        lm.weights = detail::vector_from_json(p.at("weights"));
        lm.bias = p.at("bias").get<double>();
        lm.threshold = p.at("threshold").get<double>();
        lm.margin_scale = p.at("margin_scale").get<double>();
        m.model = std::move(lm);
        break;
      }
      case LearnerKind::Mnb:
      case LearnerKind::Gnb: {
        NaiveBayesModel nb;
        nb.variant = h.at("variant").get<std::string>() == "gaussian" ? NbVariant::Gaussian : NbVariant::Multinomial;
        nb.alpha = h.at("alpha").get<double>();
        nb.var_floor = h.at("var_floor").get<double>();
        nb.class_log_prior = {p.at("class_log_prior").at(0).get<double>(), p.at("class_log_prior").at(1).get<double>()};
        nb.threshold = p.at("threshold").get<double>();
        if (nb.variant == NbVariant::Multinomial) {
          nb.feature_log_prob = detail::matrix_from_json(p.at("feature_log_prob"));
          nb.feature_offset = detail::vector_from_json(p.at("feature_offset"));
        } else {
          nb.means = detail::matrix_from_json(p.at("means"));
          nb.variances = detail::matrix_from_json(p.at("variances"));
        }
        m.model = std::move(nb);
        break;
      }
      case LearnerKind::Forest:
      case LearnerKind::Stump: {
        TreeModel tm;
        tm.kind = h.at("tree_kind").get<std::string>() == "stump" ? TreeKind::Stump : TreeKind::Forest;
        tm.max_depth = h.at("max_depth").get<int>();
        tm.max_features = h.at("max_features").get<std::size_t>();
        tm.bootstrap = h.at("bootstrap").get<bool>();
        tm.n_features = p.at("n_features").get<Eigen::Index>();
        tm.threshold = p.at("threshold").get<double>();
        tm.feature_importances = p.at("feature_importances").get<std::vector<double>>();
        for (const auto& t : p.at("trees")) tm.trees.push_back(detail::tree_from_json(t, tm.n_features));
        if (tm.trees.empty()) throw Error(ErrorKind::CorruptModel, "tree model without trees");
        m.model = std::move(tm);
        break;
      }
      case LearnerKind::Lda: {
        LdaModel lda;
        lda.ridge = h.at("ridge").get<double>();
        lda.means = {detail::vector_from_json(p.at("mean0")), detail::vector_from_json(p.at("mean1"))};
        lda.w = detail::vector_from_json(p.at("w"));
        lda.projection_threshold = p.at("projection_threshold").get<double>();
        lda.projected_std = p.at("projected_std").get<double>();
        lda.threshold = p.at("threshold").get<double>();
        m.model = std::move(lda);
        break;
      }
      case LearnerKind::Voting:
      case LearnerKind::Pasting:
      case LearnerKind::AdaBoost: {
        EnsembleModel e;
        e.kind = m.kind == LearnerKind::Voting    ? EnsembleKind::Voting
                 : m.kind == LearnerKind::Pasting ? EnsembleKind::Pasting
                                                  : EnsembleKind::AdaBoost;
        e.sample_size = h.at("sample_size").get<std::size_t>();
        for (const auto& member : p.at("members")) e.members.push_back(model_from_json(member));
        e.member_weights = p.at("member_weights").get<std::vector<double>>();
        e.sample_indices = p.at("sample_indices").get<std::vector<std::vector<std::size_t>>>();
        e.round_errors = p.at("round_errors").get<std::vector<double>>();
        e.threshold = p.at("threshold").get<double>();
        if (e.members.empty() || e.member_weights.size() != e.members.size()) {
          throw Error(ErrorKind::CorruptModel, "ensemble members and weights disagree");
        }
        m.model = std::move(e);
        break;
      }
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::CorruptModel, std::string("malformed model document: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnknownSchema || e.kind() == ErrorKind::CorruptModel) throw;
    throw Error(ErrorKind::CorruptModel, e.message());
  }
}

inline void save_model(const TrainedModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << model_to_json(m).dump(1) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

inline TrainedModel load_model(const std::string& path) {
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
  return model_from_json(doc);
}

}  // namespace parsitext
