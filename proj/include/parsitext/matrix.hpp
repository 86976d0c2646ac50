#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "parsitext/error.hpp"

namespace parsitext {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Labels = std::vector<int>;

enum class NormState { RawCount, Tfidf, Reduced };

inline std::string_view to_string(NormState s) {
  switch (s) {
    case NormState::RawCount: return "raw-count";
    case NormState::Tfidf: return "tfidf";
    case NormState::Reduced: return "reduced";
  }
  return "?";
}

inline NormState norm_state_from_string(std::string_view s) {
  if (s == "raw-count") return NormState::RawCount;
  if (s == "tfidf") return NormState::Tfidf;
  if (s == "reduced") return NormState::Reduced;
  throw Error(ErrorKind::InvalidArgument, "unknown norm state '" + std::string(s) + "'");
}

/// Documents x features, sparse while counts/TF-IDF, dense once projected.
struct FeatureMatrix {
  std::variant<SparseMatrix, Matrix> values;
  NormState state = NormState::RawCount;
  std::vector<std::string> feature_names;

  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(values); }

  Eigen::Index rows() const {
    return std::visit([](const auto& m) { return m.rows(); }, values);
  }
  Eigen::Index cols() const {
    return std::visit([](const auto& m) { return m.cols(); }, values);
  }

  Matrix dense() const {
    if (const auto* s = std::get_if<SparseMatrix>(&values)) return Matrix(*s);
    return std::get<Matrix>(values);
  }

  /// Selected rows, same column space.
  FeatureMatrix take_rows(const std::vector<std::size_t>& rows_to_keep) const {
    FeatureMatrix out;
    out.state = state;
    out.feature_names = feature_names;
    if (const auto* s = std::get_if<SparseMatrix>(&values)) {
      std::vector<Eigen::Triplet<double>> triplets;
      for (std::size_t r = 0; r < rows_to_keep.size(); ++r) {
        for (SparseMatrix::InnerIterator it(*s, static_cast<Eigen::Index>(rows_to_keep[r])); it; ++it) {
          triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
        }
      }
      SparseMatrix m(static_cast<Eigen::Index>(rows_to_keep.size()), s->cols());
      m.setFromTriplets(triplets.begin(), triplets.end());
      out.values = std::move(m);
    } else {
      const auto& d = std::get<Matrix>(values);
      Matrix m(static_cast<Eigen::Index>(rows_to_keep.size()), d.cols());
      for (std::size_t r = 0; r < rows_to_keep.size(); ++r) {
        m.row(static_cast<Eigen::Index>(r)) = d.row(static_cast<Eigen::Index>(rows_to_keep[r]));
      }
      out.values = std::move(m);
    }
    return out;
  }
};

inline Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

inline Labels take(const Labels& y, const std::vector<std::size_t>& rows) {
  Labels out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(y[r]);
  return out;
}

/// Debug dump: header `rows cols norm_state`, then one `row col value` line per
/// non-zero entry in row-major order. Values round-trip exactly.
inline void write_dump(std::ostream& out, const FeatureMatrix& fm) {
  out << fm.rows() << ' ' << fm.cols() << ' ' << to_string(fm.state) << '\n';
  char buf[64];
  auto emit = [&](Eigen::Index r, Eigen::Index c, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << r << ' ' << c << ' ' << buf << '\n';
  };
  if (const auto* s = std::get_if<SparseMatrix>(&fm.values)) {
    for (Eigen::Index r = 0; r < s->outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(*s, r); it; ++it) {
        if (it.value() != 0.0) emit(r, it.col(), it.value());
      }
    }
  } else {
    const auto& d = std::get<Matrix>(fm.values);
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.cols(); ++c) {
        if (d(r, c) != 0.0) emit(r, c, d(r, c));
      }
    }
  }
}

/// Inverse of write_dump; the result is always sparse.
inline FeatureMatrix read_dump(std::istream& in) {
  long rows = -1, cols = -1;
  std::string state;
  if (!(in >> rows >> cols >> state) || rows < 0 || cols < 0) {
    throw Error(ErrorKind::InvalidArgument, "bad matrix dump header");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  long r, c;
  double v;
  while (in >> r >> c >> v) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw Error(ErrorKind::InvalidArgument, "matrix dump entry out of range");
    }
    triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  FeatureMatrix fm;
  fm.values = std::move(m);
  fm.state = norm_state_from_string(state);
  return fm;
}

}  // namespace parsitext
