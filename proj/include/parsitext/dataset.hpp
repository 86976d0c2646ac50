#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "parsitext/error.hpp"
#include "parsitext/eval.hpp"
#include "parsitext/matrix.hpp"
#include "parsitext/random.hpp"
#include "parsitext/text_norm.hpp"
#include "parsitext/utf8.hpp"

namespace parsitext {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Document {
  std::string id;
  std::string text;
  int label = 0;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct Dataset {
  std::vector<Document> documents;
  std::string source;
  /// Hash of the parsed rows, so line endings and quoting do not affect it.
  std::string source_hash;
  std::optional<Split> split;

  std::size_t size() const { return documents.size(); }

  Labels labels() const {
    Labels y;
    y.reserve(documents.size());
    for (const auto& d : documents) y.push_back(d.label);
    return y;
  }

  Labels labels(const std::vector<std::size_t>& rows) const {
    Labels y;
    y.reserve(rows.size());
    for (auto r : rows) y.push_back(documents[r].label);
    return y;
  }
};

inline std::string content_hash(const Dataset& ds) {
  std::string bytes;
  for (const auto& d : ds.documents) bytes += d.id + '\t' + d.text + '\t' + std::to_string(d.label) + '\n';
  return fnv1a_hex(bytes);
}

enum class TableFormat { Tsv, Csv };

struct LoadOptions {
  /// Unset means: decide by extension, ".csv" is CSV and anything else TSV.
  std::optional<TableFormat> format;
  std::string text_column = "text";
  std::string label_column = "label";
  /// Optional column; rows get "row-<line>" ids when it is absent.
  std::string id_column = "id";
  std::map<std::string, int> label_map{{"0", 0}, {"1", 1}, {"neg", 0}, {"pos", 1}, {"negative", 0}, {"positive", 1}};
};

namespace detail {

struct RawRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Splits delimited text into rows. CSV fields may be double-quoted, with ""
/// for a literal quote and embedded line breaks. TSV fields are taken verbatim.
inline std::vector<RawRow> parse_table(std::string_view text, TableFormat format) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const char delim = format == TableFormat::Csv ? ',' : '\t';
  std::vector<RawRow> rows;
  RawRow row;
  std::string field;
  std::size_t line = 1;
  row.line = 1;
  bool quoted = false, field_started = false;
  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row = RawRow{};
    row.line = line;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        if (c != '\r') field.push_back(c);
      }
      continue;
    }
    if (c == '"' && format == TableFormat::Csv && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n' || c == '\r') {
      ++line;
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw RowError(ErrorKind::InvalidTable, row.line, "unterminated quoted field");
  if (!field.empty() || !row.fields.empty()) end_row();
  return rows;
}

inline std::string lower_ascii(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

/// Builds a dataset from table text with a header row.
inline Dataset parse_dataset(std::string_view text, const LoadOptions& options, TableFormat format,
                             std::string source = "<memory>") {
  const auto rows = detail::parse_table(text, format);
  if (rows.empty()) throw Error(ErrorKind::EmptyCorpus, source + ": no header row");
  const auto& header = rows.front().fields;
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto text_col = column(options.text_column);
  const auto label_col = column(options.label_column);
  if (!text_col) throw Error(ErrorKind::MissingColumn, source + ": no column named '" + options.text_column + "'");
  if (!label_col) throw Error(ErrorKind::MissingColumn, source + ": no column named '" + options.label_column + "'");
  const auto id_col = column(options.id_column);

  Dataset ds;
  ds.source = std::move(source);
  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& raw = rows[r];
    const std::size_t need = std::max({*text_col, *label_col, id_col.value_or(0)}) + 1;
    if (raw.fields.size() < need) {
      throw RowError(ErrorKind::InvalidTable, raw.line,
                     "expected at least " + std::to_string(need) + " fields, found " + std::to_string(raw.fields.size()));
    }
    for (const auto& f : raw.fields) {
      if (!utf8::is_valid(f)) throw RowError(ErrorKind::MalformedUtf8, raw.line, "field is not valid UTF-8");
    }
    Document doc;
    doc.text = raw.fields[*text_col];
    const std::string label = std::string(detail::trim_ascii(raw.fields[*label_col]));
    auto it = options.label_map.find(label);
    if (it == options.label_map.end()) it = options.label_map.find(detail::lower_ascii(label));
    if (it == options.label_map.end() || (it->second != 0 && it->second != 1)) {
      throw RowError(ErrorKind::UnmappableLabel, raw.line, "label '" + label + "' has no binary mapping");
    }
    doc.label = it->second;
    doc.id = id_col ? raw.fields[*id_col] : "row-" + std::to_string(raw.line);
    if (!ids.insert(doc.id).second) throw RowError(ErrorKind::DuplicateId, raw.line, "duplicate id '" + doc.id + "'");
    ds.documents.push_back(std::move(doc));
  }
  ds.source_hash = content_hash(ds);
  return ds;
}

inline Dataset load_dataset(const std::string& path, const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  TableFormat format = TableFormat::Tsv;
  if (options.format) {
    format = *options.format;
  } else if (path.size() >= 4 && detail::lower_ascii(path.substr(path.size() - 4)) == ".csv") {
    format = TableFormat::Csv;
  }
  return parse_dataset(ss.str(), options, format, path);
}

/// Writes id, text and label columns as TSV. Tabs and line breaks inside text become spaces.
inline void write_dataset_tsv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "id\ttext\tlabel\n";
  for (const auto& d : ds.documents) {
    std::string text = d.text;
    std::replace_if(text.begin(), text.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    out << d.id << '\t' << text << '\t' << d.label << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

/// Attaches a train/test split. Both classes must be present either way.
inline Dataset split_train_test(Dataset ds, double test_fraction = 0.2, bool stratified = true,
                                std::uint64_t seed = 0) {
  const Labels y = ds.labels();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidFraction, "test fraction must lie in (0, 1)");
  }
  if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0) {
    throw Error(ErrorKind::DegenerateLabels, "cannot split a single-class dataset");
  }
  Split split;
  if (stratified) {
    auto [train, test] = stratified_holdout(y, test_fraction, seed);
    split.train = std::move(train);
    split.test = std::move(test);
  } else {
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(y.size()) * test_fraction));
    if (n_test == 0 || n_test >= y.size()) {
      throw Error(ErrorKind::InvalidFraction, "test fraction leaves an empty train or test side");
    }
    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
  }
  ds.split = std::move(split);
  return ds;
}

/// Word lists behind the synthetic corpus. The two sentiment lexicons are
/// disjoint and survive normalization, stopword removal and stemming unchanged.
struct SyntheticLexicon {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::vector<std::string> filler;
  std::vector<std::string> subjects;
};

inline const SyntheticLexicon& synthetic_lexicon() {
  static const SyntheticLexicon lex{
      {"عالی",   "زیبا",   "دلنشین", "جذاب",   "درخشان", "شاهکار", "ممتاز",  "دیدنی", "گیرا",  "دلپذیر",
       "شاد",    "امیدوار", "هوشمند", "باشکوه", "استادانه", "روان",  "خلاق",   "صادق",    "لطیف",  "ارزشمند",
       "موفق",   "محبوب",  "ستودنی", "باورپذیر", "شیرین",  "روشن",   "نفیس",   "دلگرم",   "پرشور", "فاخر",
       "بانشاط", "مهیج",   "دلربا",  "نیکو",   "خوشایند"},
      {"ضعیف",  "خسته",   "کسل",    "افتضاح", "بیهوده", "سطحی",   "تلخ",    "آشفته",   "ناامید", "زشت",
       "سرد",   "مبهم",   "تکراری", "ناقص",   "بیحال",  "بیمزه",  "خام",    "سست",     "فاجعه",  "بدساخت",
       "مصنوعی", "پراکنده", "ملال",  "آزارنده", "ناخوشایند", "شلوغ", "بیروح",  "ناشیانه", "کهنه",   "بیمعنی",
       "دردناک", "مایوس",  "ناموفق", "غمگین",  "نازیبا"},
      {"واقعا", "کاملا", "فیلم", "داستان", "امشب", "دیروز", "سینما", "صحنه", "پایان", "آغاز", "موسیقی", "تصویر"},
      {"فیلم", "بازیگر", "کارگردان", "فیلمنامه", "داستان", "موسیقی", "نور", "صدا", "تدوین", "روایت"}};
  return lex;
}

/// Template sentences over disjoint positive and negative lexicons plus shared
/// filler. Labels alternate so any even n is exactly balanced; `label_noise`
/// flips round(noise * n) labels chosen by the seed.
inline Dataset generate_synthetic_corpus(std::size_t n_docs, std::uint64_t seed, double label_noise = 0.0) {
  if (n_docs < 20) throw Error(ErrorKind::InvalidArgument, "synthetic corpus needs at least 20 documents");
  if (!(label_noise >= 0.0 && label_noise <= 0.5)) {
    throw Error(ErrorKind::InvalidFraction, "label noise must lie in [0, 0.5]");
  }
  const auto& lex = synthetic_lexicon();
  Rng rng(seed);
  auto pick = [&](const std::vector<std::string>& words) -> const std::string& {
    return words[rng.below(words.size())];
  };

  Dataset ds;
  char params[96];
  std::snprintf(params, sizeof params, "synthetic n=%zu seed=%llu noise=%.10g", n_docs,
                static_cast<unsigned long long>(seed), label_noise);
  ds.source = params;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const int label = static_cast<int>(i % 2);
    const auto& words = label ? lex.positive : lex.negative;
    std::string text;
    const std::size_t sentences = 1 + rng.below(3);
    for (std::size_t s = 0; s < sentences; ++s) {
      if (s) text += " . ";
      switch (rng.below(4)) {
        case 0:
          text += "این " + pick(lex.subjects) + " " + pick(words) + " بود";
          break;
        case 1:
          text += pick(lex.filler) + " " + pick(lex.subjects) + " " + pick(words) + " و " + pick(words) + " است";
          break;
        case 2:
          text += "به نظر من " + pick(lex.subjects) + " " + pick(lex.filler) + " " + pick(words) + " بود";
          break;
        default:
          text += pick(lex.subjects) + " " + pick(words) + " " + pick(lex.filler) + " " + pick(lex.filler);
          break;
      }
    }
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", i);
    ds.documents.push_back({id, std::move(text), label});
  }
  const auto flips = static_cast<std::size_t>(std::llround(label_noise * static_cast<double>(n_docs)));
  for (std::size_t r : rng.sample_without_replacement(n_docs, flips)) {
    ds.documents[r].label = 1 - ds.documents[r].label;
  }
  ds.source_hash = content_hash(ds);
  return ds;
}

}  // namespace parsitext
