#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "parsitext/error.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/tokenize.hpp"
#include "parsitext/unicode.hpp"
#include "parsitext/utf8.hpp"

namespace parsitext {

enum class NgramUnit { Word, Char };

inline std::string_view to_string(NgramUnit u) { return u == NgramUnit::Word ? "word" : "char"; }

inline NgramUnit ngram_unit_from_string(std::string_view s) {
  if (s == "word") return NgramUnit::Word;
  if (s == "char") return NgramUnit::Char;
  throw Error(ErrorKind::InvalidArgument, "unit must be word or char, got '" + std::string(s) + "'");
}

/// Word n-grams are space-joined tokens. Character n-grams never cross a token
/// boundary, and ZWNJ is not counted as a character.
inline std::vector<std::string> extract_ngrams(const TokenStream& stream, NgramUnit unit, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n-gram order must be positive");
  std::vector<std::string> grams;
  if (unit == NgramUnit::Word) {
    const auto& t = stream.tokens;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::string g = t[i];
      for (std::size_t j = 1; j < n; ++j) {
        g += ' ';
        g += t[i + j];
      }
      grams.push_back(std::move(g));
    }
    return grams;
  }
  for (const auto& token : stream.tokens) {
    std::u32string chars;
    for (char32_t cp : utf8::decode(token)) {
      if (cp != unicode::kZwnj) chars.push_back(cp);
    }
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
      grams.push_back(utf8::encode(std::u32string_view(chars).substr(i, n)));
    }
  }
  return grams;
}

struct Vocabulary {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> names;
  std::size_t n = 1;
  NgramUnit unit = NgramUnit::Word;
  std::vector<std::size_t> doc_freq;
  std::size_t n_docs = 0;

  std::size_t size() const { return names.size(); }

  const std::size_t* find(const std::string& gram) const {
    auto it = index.find(gram);
    return it == index.end() ? nullptr : &it->second;
  }

  double idf(std::size_t column) const {
    return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(doc_freq[column]))) + 1.0;
  }
};

inline Vocabulary build_vocabulary(const std::vector<TokenStream>& corpus, NgramUnit unit, std::size_t n,
                                   std::size_t min_df = 1) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "cannot build a vocabulary from zero documents");
  Vocabulary all;
  all.unit = unit;
  all.n = n;
  all.n_docs = corpus.size();
  std::vector<std::size_t> last_doc;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (auto& g : extract_ngrams(corpus[d], unit, n)) {
      auto [it, inserted] = all.index.try_emplace(g, all.names.size());
      if (inserted) {
        all.names.push_back(std::move(g));
        all.doc_freq.push_back(1);
        last_doc.push_back(d);
      } else if (last_doc[it->second] != d) {
        ++all.doc_freq[it->second];
        last_doc[it->second] = d;
      }
    }
  }
  if (min_df <= 1) return all;

  Vocabulary kept;
  kept.unit = unit;
  kept.n = n;
  kept.n_docs = all.n_docs;
  for (std::size_t c = 0; c < all.names.size(); ++c) {
    if (all.doc_freq[c] < min_df) continue;
    kept.index.emplace(all.names[c], kept.names.size());
    kept.names.push_back(all.names[c]);
    kept.doc_freq.push_back(all.doc_freq[c]);
  }
  return kept;
}

/// Sorted (column, weight) pairs of one document.
using SparseRow = std::vector<std::pair<std::size_t, double>>;

namespace detail {

inline SparseRow count_row(const TokenStream& doc, const Vocabulary& vocab) {
  std::unordered_map<std::size_t, double> counts;
  for (const auto& g : extract_ngrams(doc, vocab.unit, vocab.n)) {
    if (const auto* c = vocab.find(g)) counts[*c] += 1.0;
  }
  SparseRow row(counts.begin(), counts.end());
  std::sort(row.begin(), row.end());
  return row;
}

inline FeatureMatrix assemble(const std::vector<SparseRow>& rows, const Vocabulary& vocab, NormState state) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [c, v] : rows[r]) triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  }
  SparseMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(vocab.size()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  FeatureMatrix fm;
  fm.values = std::move(m);
  fm.state = state;
  fm.feature_names = vocab.names;
  return fm;
}

}  // namespace detail

inline FeatureMatrix count_transform(const std::vector<TokenStream>& corpus, const Vocabulary& vocab) {
  std::vector<SparseRow> rows;
  rows.reserve(corpus.size());
  for (const auto& doc : corpus) rows.push_back(detail::count_row(doc, vocab));
  return detail::assemble(rows, vocab, NormState::RawCount);
}

/// Raw count times smoothed idf, then L2-normalized. Out-of-vocabulary grams are ignored.
inline SparseRow tfidf_transform(const TokenStream& doc, const Vocabulary& vocab) {
  SparseRow row = detail::count_row(doc, vocab);
  double norm2 = 0.0;
  for (auto& [c, v] : row) {
    v *= vocab.idf(c);
    norm2 += v * v;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& [c, v] : row) v *= inv;
  }
  return row;
}

inline FeatureMatrix tfidf_transform(const std::vector<TokenStream>& corpus, const Vocabulary& vocab) {
  std::vector<SparseRow> rows;
  rows.reserve(corpus.size());
  for (const auto& doc : corpus) rows.push_back(tfidf_transform(doc, vocab));
  return detail::assemble(rows, vocab, NormState::Tfidf);
}

inline FeatureMatrix tfidf_fit_transform(const std::vector<TokenStream>& corpus, const Vocabulary& vocab) {
  return tfidf_transform(corpus, vocab);
}

/// Column-wise concatenation. The result stays sparse only if every part is sparse.
inline FeatureMatrix combine_features(const std::vector<const FeatureMatrix*>& parts) {
  if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to combine");
  const Eigen::Index rows = parts.front()->rows();
  bool all_sparse = true;
  Eigen::Index cols = 0;
  for (const auto* p : parts) {
    if (p->rows() != rows) {
      throw Error(ErrorKind::ShapeMismatch, "row counts differ: " + std::to_string(rows) + " vs " +
                                                std::to_string(p->rows()));
    }
    all_sparse = all_sparse && p->is_sparse();
    cols += p->cols();
  }

  FeatureMatrix out;
  // concatenated TF-IDF rows are no longer unit length
  const bool all_counts = std::all_of(parts.begin(), parts.end(),
                                      [](const FeatureMatrix* p) { return p->state == NormState::RawCount; });
  out.state = all_counts ? NormState::RawCount : NormState::Reduced;
  bool named = true;
  for (const auto* p : parts) named = named && static_cast<Eigen::Index>(p->feature_names.size()) == p->cols();
  if (named) {
    for (const auto* p : parts) {
      out.feature_names.insert(out.feature_names.end(), p->feature_names.begin(), p->feature_names.end());
    }
  }

  if (all_sparse) {
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::Index offset = 0;
    for (const auto* p : parts) {
      const auto& s = std::get<SparseMatrix>(p->values);
      for (Eigen::Index r = 0; r < s.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(s, r); it; ++it) {
          triplets.emplace_back(static_cast<int>(r), static_cast<int>(offset + it.col()), it.value());
        }
      }
      offset += s.cols();
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    out.values = std::move(m);
  } else {
    Matrix m(rows, cols);
    Eigen::Index offset = 0;
    for (const auto* p : parts) {
      m.middleCols(offset, p->cols()) = p->dense();
      offset += p->cols();
    }
    out.values = std::move(m);
  }
  return out;
}

template <typename... Rest>
FeatureMatrix combine_features(const FeatureMatrix& a, const FeatureMatrix& b, const Rest&... rest) {
  return combine_features(std::vector<const FeatureMatrix*>{&a, &b, &rest...});
}

inline FeatureMatrix make_dense(Matrix m, NormState state, std::vector<std::string> names = {}) {
  FeatureMatrix fm;
  fm.values = std::move(m);
  fm.state = state;
  fm.feature_names = std::move(names);
  return fm;
}

}  // namespace parsitext
