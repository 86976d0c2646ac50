#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parsitext {

enum class ErrorKind {
  InvalidArgument,
  EmptyCorpus,
  InsufficientData,
  InvalidK,
  ShapeMismatch,
  NonFiniteInput,
  DegenerateLabels,
  NegativeFeature,
  InvalidSampleSize,
  UndefinedRoc,
  TargetUnreachable,
  MissingColumn,
  UnmappableLabel,
  MalformedUtf8,
  DuplicateId,
  InvalidFraction,
  InvalidTable,
  UnknownSchema,
  CorruptModel,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::NegativeFeature: return "NegativeFeature";
    case ErrorKind::InvalidSampleSize: return "InvalidSampleSize";
    case ErrorKind::UndefinedRoc: return "UndefinedRoc";
    case ErrorKind::TargetUnreachable: return "TargetUnreachable";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnmappableLabel: return "UnmappableLabel";
    case ErrorKind::MalformedUtf8: return "MalformedUtf8";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::InvalidFraction: return "InvalidFraction";
    case ErrorKind::InvalidTable: return "InvalidTable";
    case ErrorKind::UnknownSchema: return "UnknownSchema";
    case ErrorKind::CorruptModel: return "CorruptModel";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The text without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

/// Raised by threshold tuning; `best()` is the closest value the target metric can reach.
class TargetUnreachableError : public Error {
 public:
  TargetUnreachableError(const std::string& message, double best)
      : Error(ErrorKind::TargetUnreachable, message), best_(best) {}

  double best() const noexcept { return best_; }

 private:
  double best_;
};

/// Row-tagged ingestion failure (UnmappableLabel, MalformedUtf8, DuplicateId).
class RowError : public Error {
 public:
  RowError(ErrorKind kind, std::size_t row, const std::string& message)
      : Error(kind, "row " + std::to_string(row) + ": " + message), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace parsitext
