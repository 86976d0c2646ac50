#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"

namespace parsitext::detail {

inline void check_training_data(const Matrix& X, const Labels& y, std::string_view who) {
  if (X.rows() != static_cast<Eigen::Index>(y.size())) {
    throw Error(ErrorKind::ShapeMismatch, std::string(who) + ": " + std::to_string(X.rows()) + " rows but " +
                                              std::to_string(y.size()) + " labels");
  }
  if (X.rows() == 0) throw Error(ErrorKind::InsufficientData, std::string(who) + ": no training rows");
  if (!X.allFinite()) throw Error(ErrorKind::NonFiniteInput, std::string(who) + ": input contains NaN or infinity");
  for (int label : y) {
    if (label != 0 && label != 1) {
      throw Error(ErrorKind::InvalidArgument, std::string(who) + ": labels must be 0 or 1");
    }
  }
}

inline std::array<std::size_t, 2> class_counts(const Labels& y) {
  std::array<std::size_t, 2> counts{0, 0};
  for (int label : y) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

inline void require_both_classes(const Labels& y, std::string_view who) {
  const auto counts = class_counts(y);
  if (counts[0] == 0 || counts[1] == 0) {
    throw Error(ErrorKind::DegenerateLabels, std::string(who) + ": training labels contain a single class");
  }
}

inline void check_columns(const Matrix& X, Eigen::Index expected, std::string_view who) {
  if (X.cols() != expected) {
    throw Error(ErrorKind::ShapeMismatch, std::string(who) + ": expected " + std::to_string(expected) +
                                              " features, got " + std::to_string(X.cols()));
  }
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// N x 2 matrix of (P(class 0), P(class 1)).
inline Matrix two_column(const Vector& p1) {
  Matrix out(p1.size(), 2);
  out.col(0) = (1.0 - p1.array()).matrix();
  out.col(1) = p1;
  return out;
}

}  // namespace parsitext::detail
