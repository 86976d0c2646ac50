#pragma once

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parsitext/default_tables.hpp"
#include "parsitext/error.hpp"
#include "parsitext/text_norm.hpp"
#include "parsitext/unicode.hpp"
#include "parsitext/utf8.hpp"

namespace parsitext {

struct TokenStream {
  std::vector<std::string> tokens;
  std::string doc_id;

  friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

/// Splits on whitespace only; ZWNJ stays inside words. Punctuation is a boundary
/// as well, so it is stripped from token edges and never survives inside a token.
inline TokenStream tokenize(const NormalizedText& text, std::string doc_id = {}) {
  TokenStream stream;
  stream.doc_id = std::move(doc_id);
  std::u32string current;
  auto flush = [&] {
    std::size_t b = 0, e = current.size();
    while (b < e && current[b] == unicode::kZwnj) ++b;
    while (e > b && current[e - 1] == unicode::kZwnj) --e;
    if (e > b) stream.tokens.push_back(utf8::encode(std::u32string_view(current).substr(b, e - b)));
    current.clear();
  };
  for (char32_t cp : utf8::decode(text.text)) {
    if (unicode::is_whitespace(cp) || unicode::is_punctuation(cp)) {
      flush();
    } else {
      current.push_back(cp);
    }
  }
  flush();
  return stream;
}

using StopwordSet = std::set<std::string>;

inline TokenStream remove_stopwords(TokenStream stream, const StopwordSet& stopwords) {
  std::erase_if(stream.tokens, [&](const std::string& t) { return stopwords.count(t) > 0; });
  return stream;
}

/// One word per line; each entry is normalized so it compares equal to normalized tokens.
inline StopwordSet parse_stopwords(std::istream& in,
                                   const NormalizationTable& table = NormalizationTable::defaults()) {
  StopwordSet words;
  for (const auto& [number, line] : detail::data_lines(in)) {
    auto word = normalize(detail::trim_ascii(line), table).text;
    if (!word.empty()) words.insert(std::move(word));
  }
  return words;
}

inline StopwordSet load_stopwords(const std::string& path,
                                  const NormalizationTable& table = NormalizationTable::defaults()) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return parse_stopwords(in, table);
}

inline const StopwordSet& default_stopwords() {
  static const StopwordSet words = [] {
    std::istringstream in{std::string(defaults::kStopwords)};
    return parse_stopwords(in);
  }();
  return words;
}

struct SuffixRule {
  std::u32string suffix;
  std::size_t min_stem = 2;
};

struct StemmerRules {
  /// Longest suffix first.
  std::vector<SuffixRule> suffixes;

  static StemmerRules parse(std::istream& in);
  static StemmerRules load(const std::string& path);
  static const StemmerRules& defaults();
};

inline StemmerRules StemmerRules::parse(std::istream& in) {
  StemmerRules rules;
  for (const auto& [number, line] : detail::data_lines(in)) {
    auto fields = detail::split_tabs(line);
    if (fields.size() < 2 || fields[0].empty()) {
      throw Error(ErrorKind::InvalidTable,
                  "line " + std::to_string(number) + ": expected SUFFIX<TAB>MIN_LENGTH");
    }
    SuffixRule rule;
    rule.suffix = utf8::decode(fields[0]);
    try {
      rule.min_stem = std::stoul(std::string(detail::trim_ascii(fields[1])));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidTable, "line " + std::to_string(number) + ": bad length");
    }
    rules.suffixes.push_back(std::move(rule));
  }
  std::stable_sort(rules.suffixes.begin(), rules.suffixes.end(),
                   [](const SuffixRule& a, const SuffixRule& b) {
                     return a.suffix.size() > b.suffix.size();
                   });
  return rules;
}

inline StemmerRules StemmerRules::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return parse(in);
}

inline const StemmerRules& StemmerRules::defaults() {
  static const StemmerRules rules = [] {
    std::istringstream in{std::string(defaults::kStemRules)};
    return parse(in);
  }();
  return rules;
}

/// Light suffix stripping: one suffix per pass, at most two passes, and never
/// below a rule's minimum stem length. A ZWNJ left dangling by a strip is dropped.
inline std::string stem(std::string_view token, const StemmerRules& rules = StemmerRules::defaults()) {
  constexpr int kMaxPasses = 2;
  std::u32string word = utf8::decode(token);
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool fired = false;
    for (const auto& rule : rules.suffixes) {
      if (!detail::ends_with(word, rule.suffix)) continue;
      std::u32string_view rest(word);
      rest.remove_suffix(rule.suffix.size());
      while (!rest.empty() && rest.back() == unicode::kZwnj) rest.remove_suffix(1);
      if (rest.size() < rule.min_stem) continue;
      word = std::u32string(rest);
      fired = true;
      break;
    }
    if (!fired) break;
  }
  return utf8::encode(word);
}

inline TokenStream stem_all(TokenStream stream, const StemmerRules& rules = StemmerRules::defaults()) {
  for (auto& t : stream.tokens) t = stem(t, rules);
  return stream;
}

/// Raw document to filtered, stemmed tokens. Holds references to immutable tables.
struct Preprocessor {
  const NormalizationTable* table = &NormalizationTable::defaults();
  const StopwordSet* stopwords = &default_stopwords();
  const StemmerRules* stemmer = &StemmerRules::defaults();
  bool use_stemming = true;
  bool remove_stops = true;

  TokenStream operator()(std::string_view raw, std::string doc_id = {}) const {
    auto stream = tokenize(normalize(raw, *table), std::move(doc_id));
    if (remove_stops) stream = remove_stopwords(std::move(stream), *stopwords);
    if (use_stemming) {
      stream = stem_all(std::move(stream), *stemmer);
      // a stem can coincide with a stopword
      if (remove_stops) stream = remove_stopwords(std::move(stream), *stopwords);
    }
    return stream;
  }
};

}  // namespace parsitext
