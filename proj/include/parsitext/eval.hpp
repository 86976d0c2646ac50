#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/parallel.hpp"
#include "parsitext/random.hpp"

namespace parsitext {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

namespace detail {

inline void check_binary(const Labels& y, const char* who) {
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorKind::InvalidArgument, std::string(who) + ": labels must be 0 or 1");
  }
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline ConfusionCounts confusion(const Labels& y_true, const Labels& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorKind::ShapeMismatch, "confusion: " + std::to_string(y_true.size()) + " labels but " +
                                              std::to_string(y_pred.size()) + " predictions");
  }
  detail::check_binary(y_true, "confusion");
  detail::check_binary(y_pred, "confusion");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1) {
      y_pred[i] == 1 ? ++c.tp : ++c.fn;
    } else {
      y_pred[i] == 1 ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

/// A metric whose denominator was empty is reported as 0 with its flag set.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
  bool accuracy_degenerate = false;
};

inline Metrics precision_recall_f1(const ConfusionCounts& c) {
  Metrics m;
  auto ratio = [](std::size_t num, std::size_t den, bool& flag) {
    if (den == 0) {
      flag = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(c.tp, c.tp + c.fp, m.precision_degenerate);
  m.recall = ratio(c.tp, c.tp + c.fn, m.recall_degenerate);
  m.accuracy = ratio(c.tp + c.tn, c.total(), m.accuracy_degenerate);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_degenerate = true;
  }
  return m;
}

inline double accuracy(const ConfusionCounts& c) { return precision_recall_f1(c).accuracy; }

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  /// Rows with score >= threshold are called positive.
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Sweeps every distinct score from high to low; the first point uses +inf.
inline RocCurve roc_auc(const Labels& y, const Vector& scores) {
  if (static_cast<Eigen::Index>(y.size()) != scores.size()) {
    throw Error(ErrorKind::ShapeMismatch, "roc_auc: labels and scores differ in length");
  }
  detail::check_binary(y, "roc_auc");
  if (!scores.allFinite()) throw Error(ErrorKind::NonFiniteInput, "roc_auc: scores contain NaN or infinity");
  const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  const std::size_t neg = y.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorKind::UndefinedRoc, "roc_auc: needs both classes");

  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores(static_cast<Eigen::Index>(order[i]));
    for (; i < order.size() && scores(static_cast<Eigen::Index>(order[i])) == s; ++i) {
      y[order[i]] == 1 ? ++tp : ++fp;
    }
    roc.points.push_back(
        {static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    roc.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return roc;
}

/// Per-split summary used by cross-validation and experiment reports.
struct EvalMetrics {
  Metrics metrics;
  ConfusionCounts counts;
  /// Absent when the evaluated rows hold a single class.
  std::optional<double> auc;
};

inline EvalMetrics evaluate_scores(const Labels& y, const Vector& scores, double cut) {
  Labels pred(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) pred[i] = scores(static_cast<Eigen::Index>(i)) > cut ? 1 : 0;
  EvalMetrics out;
  out.counts = confusion(y, pred);
  out.metrics = precision_recall_f1(out.counts);
  if (out.counts.tp + out.counts.fn > 0 && out.counts.tn + out.counts.fp > 0) out.auc = roc_auc(y, scores).auc;
  return out;
}

/// Splits row indices into k folds of near-equal size, dealing each class's
/// shuffled rows round-robin so every fold keeps the class ratio.
inline std::vector<std::vector<std::size_t>> stratified_folds(const Labels& y, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > y.size()) {
    throw Error(ErrorKind::InvalidK, "fold count " + std::to_string(k) + " must lie in [2, " +
                                         std::to_string(y.size()) + "]");
  }
  detail::check_binary(y, "stratified_folds");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (int label : {0, 1}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == label) rows.push_back(i);
    }
    rng.shuffle(rows);
    for (std::size_t r : rows) folds[next++ % k].push_back(r);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// Stratified hold-out: each class contributes its share of the test rows,
/// with rounding settled by largest remainder so the total is round(n * fraction).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(const Labels& y,
                                                                                      double test_fraction,
                                                                                      std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidFraction, "test fraction must lie in (0, 1)");
  }
  detail::check_binary(y, "stratified_holdout");
  std::array<std::vector<std::size_t>, 2> rows;
  for (std::size_t i = 0; i < y.size(); ++i) rows[static_cast<std::size_t>(y[i])].push_back(i);
  if (rows[0].empty() || rows[1].empty()) {
    throw Error(ErrorKind::DegenerateLabels, "stratified split needs both classes");
  }
  const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(y.size()) * test_fraction));
  if (total == 0 || total >= y.size()) {
    throw Error(ErrorKind::InvalidFraction, "test fraction leaves an empty train or test side");
  }
  std::array<std::size_t, 2> take{};
  std::array<double, 2> rem{};
  for (std::size_t c = 0; c < 2; ++c) {
    const double exact = static_cast<double>(rows[c].size()) * test_fraction;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    rem[c] = exact - std::floor(exact);
  }
  while (take[0] + take[1] < total) {
    const std::size_t c = rem[1] > rem[0] ? 1 : 0;
    ++take[c];
    rem[c] = -1.0;
  }
  Rng rng(seed);
  std::vector<std::size_t> train, test;
  for (std::size_t c = 0; c < 2; ++c) {
    rng.shuffle(rows[c]);
    test.insert(test.end(), rows[c].begin(), rows[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
    train.insert(train.end(), rows[c].begin() + static_cast<std::ptrdiff_t>(take[c]), rows[c].end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

/// Trains on the first index set and scores the second.
using FoldRunner = std::function<EvalMetrics(const std::vector<std::size_t>& train, const std::vector<std::size_t>& test)>;

struct MetricSummary {
  double mean = 0.0;
  /// Population standard deviation over folds.
  double std = 0.0;
  /// Folds where the metric was defined.
  std::size_t n = 0;
};

struct CvResult {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> fold_indices;
  std::vector<EvalMetrics> per_fold;
  MetricSummary precision, recall, f1, accuracy, auc;
};

namespace detail {

inline MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

}  // namespace detail

/// Folds run concurrently; results are kept in fold order.
inline CvResult cross_validate(const Labels& y, std::size_t k, std::uint64_t seed, const FoldRunner& run,
                               std::size_t threads = 0) {
  CvResult out;
  out.k = k;
  out.fold_indices = stratified_folds(y, k, seed);
  out.per_fold.resize(k);
  parallel_for(
      k,
      [&](std::size_t f) {
        std::vector<std::size_t> train;
        for (std::size_t g = 0; g < k; ++g) {
          if (g != f) train.insert(train.end(), out.fold_indices[g].begin(), out.fold_indices[g].end());
        }
        std::sort(train.begin(), train.end());
        out.per_fold[f] = run(train, out.fold_indices[f]);
      },
      threads);
  std::vector<double> p, r, f1, a, auc;
  for (const auto& m : out.per_fold) {
    p.push_back(m.metrics.precision);
    r.push_back(m.metrics.recall);
    f1.push_back(m.metrics.f1);
    a.push_back(m.metrics.accuracy);
    if (m.auc) auc.push_back(*m.auc);
  }
  out.precision = detail::summarize(p);
  out.recall = detail::summarize(r);
  out.f1 = detail::summarize(f1);
  out.accuracy = detail::summarize(a);
  out.auc = detail::summarize(auc);
  return out;
}

struct CurvePoint {
  double fraction = 0.0;
  std::size_t size = 0;
  double train = 0.0;
  double validation = 0.0;
  double gap() const { return train - validation; }
};

struct LearningCurve {
  std::vector<CurvePoint> points;
  std::vector<std::size_t> validation_rows;
  /// Mean of train minus validation over all points.
  double mean_gap = 0.0;
};

/// Returns (train metric, validation metric) for a model fit on `train`.
using CurveRunner =
    std::function<std::pair<double, double>(const std::vector<std::size_t>& train, const std::vector<std::size_t>& val)>;

/// Holds out `validation_fraction` of the rows once, shuffles the rest once,
/// and trains on growing prefixes of that shuffle.
inline LearningCurve learning_curve(const Labels& y, const std::vector<double>& fractions, std::uint64_t seed,
                                    const CurveRunner& run, double validation_fraction = 0.2,
                                    std::size_t threads = 0) {
  if (fractions.empty()) throw Error(ErrorKind::InvalidFraction, "learning curve needs at least one fraction");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorKind::InvalidFraction, "train fractions must lie in (0, 1]");
  }
  auto [pool, val] = stratified_holdout(y, validation_fraction, derive_seed(seed, 0));
  Rng rng(derive_seed(seed, 1));
  rng.shuffle(pool);

  LearningCurve curve;
  curve.validation_rows = val;
  curve.points.resize(fractions.size());
  parallel_for(
      fractions.size(),
      [&](std::size_t i) {
        const auto size = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(fractions[i] * static_cast<double>(pool.size()) - 1e-9)));
        std::vector<std::size_t> train(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
        std::sort(train.begin(), train.end());
        const auto [tr, va] = run(train, val);
        curve.points[i] = {fractions[i], size, tr, va};
      },
      threads);
  for (const auto& p : curve.points) curve.mean_gap += p.gap();
  curve.mean_gap /= static_cast<double>(curve.points.size());
  return curve;
}

enum class TuneMetric { Recall, Precision };

inline std::string_view to_string(TuneMetric m) { return m == TuneMetric::Recall ? "recall" : "precision"; }

inline TuneMetric tune_metric_from_string(std::string_view s) {
  if (s == "recall") return TuneMetric::Recall;
  if (s == "precision") return TuneMetric::Precision;
  throw Error(ErrorKind::InvalidArgument, "tune metric must be recall or precision, got '" + std::string(s) + "'");
}

struct ThresholdChoice {
  /// Rows with score > threshold are called positive.
  double threshold = 0.0;
  Metrics metrics;
};

/// Candidate cuts: every distinct score, plus one just below the smallest so
/// that everything can be called positive.
inline std::vector<double> threshold_candidates(const Vector& scores) {
  std::vector<double> c(scores.data(), scores.data() + scores.size());
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  if (!c.empty()) c.insert(c.begin(), std::nextafter(c.front(), -std::numeric_limits<double>::infinity()));
  return c;
}

/// Recall target: the largest cut whose recall still reaches the target, which
/// buys the most precision. Precision target: the smallest cut whose precision
/// reaches it, which keeps the most recall.
inline ThresholdChoice tune_threshold(const Labels& y, const Vector& scores, TuneMetric metric, double target) {
  if (static_cast<Eigen::Index>(y.size()) != scores.size()) {
    throw Error(ErrorKind::ShapeMismatch, "tune_threshold: labels and scores differ in length");
  }
  if (!(target >= 0.0 && target <= 1.0)) throw Error(ErrorKind::InvalidArgument, "target must lie in [0, 1]");
  if (y.empty()) throw Error(ErrorKind::InsufficientData, "tune_threshold: no validation rows");
  if (!scores.allFinite()) throw Error(ErrorKind::NonFiniteInput, "tune_threshold: scores contain NaN or infinity");
  detail::check_binary(y, "tune_threshold");

  const auto cands = threshold_candidates(scores);
  std::vector<Metrics> at(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) at[i] = evaluate_scores(y, scores, cands[i]).metrics;

  double best = 0.0;
  std::optional<std::size_t> pick;
  if (metric == TuneMetric::Recall) {
    for (std::size_t i = 0; i < cands.size(); ++i) {
      best = std::max(best, at[i].recall);
      if (at[i].recall >= target) pick = i;
    }
  } else {
    for (std::size_t i = cands.size(); i-- > 0;) {
      if (at[i].precision_degenerate && target > 0.0) continue;
      best = std::max(best, at[i].precision);
      if (at[i].precision >= target) pick = i;
    }
  }
  if (!pick) {
    throw TargetUnreachableError(std::string(to_string(metric)) + " target " + detail::format_double(target) +
                                     " is unreachable; best is " + detail::format_double(best),
                                 best);
  }
  return {cands[*pick], at[*pick]};
}

inline void write_roc_csv(const RocCurve& roc, const std::string& path, const std::string& header_comment = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "fpr,tpr,threshold\n";
  for (const auto& p : roc.points) {
    out << detail::format_double(p.fpr) << ',' << detail::format_double(p.tpr) << ','
        << detail::format_double(p.threshold) << '\n';
  }
}

inline void write_learning_curve_csv(const LearningCurve& curve, const std::string& path,
                                     const std::string& header_comment = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "size,train,val\n";
  for (const auto& p : curve.points) {
    out << p.size << ',' << detail::format_double(p.train) << ',' << detail::format_double(p.validation) << '\n';
  }
}

struct ChartSeries {
  std::string name;
  std::vector<double> x, y;
};

/// Minimal standalone SVG line chart with a legend.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                                  const std::vector<ChartSeries>& series) {
  constexpr double W = 480, H = 360, L = 60, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  auto f = detail::format_double;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" font-family=\"sans-serif\" "
                    "font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"240\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  svg += "<line x1=\"" + f(L) + "\" y1=\"" + f(H - B) + "\" x2=\"" + f(W - R) + "\" y2=\"" + f(H - B) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + f(L) + "\" y1=\"" + f(T) + "\" x2=\"" + f(L) + "\" y2=\"" + f(H - B) +
         "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    svg += "<text x=\"" + f(px(xv)) + "\" y=\"" + f(H - B + 16) + "\" text-anchor=\"middle\">" + f(xv) + "</text>\n";
    svg += "<text x=\"" + f(L - 6) + "\" y=\"" + f(py(yv) + 4) + "\" text-anchor=\"end\">" + f(yv) + "</text>\n";
  }
  svg += "<text x=\"" + f((L + W - R) / 2) + "\" y=\"" + f(H - 10) + "\" text-anchor=\"middle\">" + x_label +
         "</text>\n";
  svg += "<text x=\"14\" y=\"" + f((T + H - B) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         f((T + H - B) / 2) + ")\">" + y_label + "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 5];
    std::string pts;
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      pts += (i ? " " : "") + f(px(series[s].x[i])) + "," + f(py(series[s].y[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts +
           "\"/>\n";
    const double ly = T + 14.0 * static_cast<double>(s);
    svg += "<text x=\"" + f(W - R - 4) + "\" y=\"" + f(ly + 10) + "\" text-anchor=\"end\" fill=\"" + color + "\">" +
           series[s].name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace parsitext
