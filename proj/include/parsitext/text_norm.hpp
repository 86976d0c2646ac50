#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parsitext/default_tables.hpp"
#include "parsitext/error.hpp"
#include "parsitext/unicode.hpp"
#include "parsitext/utf8.hpp"

namespace parsitext {

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    fields.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

inline std::string_view trim_ascii(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Non-comment, non-blank lines with their 1-based line numbers; CR and BOM tolerated.
inline std::vector<std::pair<std::size_t, std::string>> data_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_ascii(line).empty() || line.front() == '#') continue;
    out.emplace_back(number, line);
  }
  return out;
}

inline char32_t parse_code_point(std::string_view hex, std::size_t line) {
  hex = trim_ascii(hex);
  if (hex.rfind("U+", 0) == 0 || hex.rfind("u+", 0) == 0) hex.remove_prefix(2);
  unsigned long value = 0;
  bool ok = !hex.empty() && hex.size() <= 6;
  for (char c : hex) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) ok = false;
  }
  if (ok) value = std::stoul(std::string(hex), nullptr, 16);
  if (!ok || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
    throw Error(ErrorKind::InvalidTable,
                "line " + std::to_string(line) + ": bad code point '" + std::string(hex) + "'");
  }
  return static_cast<char32_t>(value);
}

inline std::string code_point_label(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

inline bool ends_with(std::u32string_view s, std::u32string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

/// Ordered set of fired rule ids; first firing decides the position.
class RuleLog {
 public:
  void fire(std::string id) {
    if (seen_.insert(id).second) order_.push_back(std::move(id));
  }
  std::vector<std::string> take() { return std::move(order_); }

 private:
  std::set<std::string> seen_;
  std::vector<std::string> order_;
};

}  // namespace detail

struct Affix {
  std::u32string text;
  bool fused = false;  // also split out of words written without a break
};

/// Immutable after construction; safe to share between threads.
struct NormalizationTable {
  /// Source code point -> canonical code point, or nullopt to delete.
  std::map<char32_t, std::optional<char32_t>> char_map;
  /// Longest first.
  std::vector<Affix> affixes;
  std::set<std::u32string> protected_words;
  /// Inclusive ranges removed outright after substitution.
  std::vector<std::pair<char32_t, char32_t>> stripped_ranges;

  bool is_stripped(char32_t cp) const {
    return std::any_of(stripped_ranges.begin(), stripped_ranges.end(),
                       [cp](const auto& r) { return cp >= r.first && cp <= r.second; });
  }

  bool is_affix(std::u32string_view word) const {
    return std::any_of(affixes.begin(), affixes.end(),
                       [word](const Affix& a) { return a.text == word; });
  }

  /// Throws InvalidTable when the substitution map is not a projection.
  void validate() const {
    for (const auto& [src, dst] : char_map) {
      if (dst && char_map.count(*dst)) {
        throw Error(ErrorKind::InvalidTable, detail::code_point_label(src) + " maps to " +
                                                 detail::code_point_label(*dst) +
                                                 ", which is itself rewritten");
      }
    }
    for (const auto& affix : affixes) {
      if (affix.text.empty()) throw Error(ErrorKind::InvalidTable, "empty affix");
      for (char32_t cp : affix.text) {
        if (cp == unicode::kZwnj || unicode::is_whitespace(cp) || char_map.count(cp) ||
            is_stripped(cp)) {
          throw Error(ErrorKind::InvalidTable,
                      "affix '" + utf8::encode(affix.text) + "' is not in canonical form");
        }
      }
    }
  }

  static NormalizationTable parse(std::istream& rules, std::istream& affix_list);
  static NormalizationTable load(const std::string& rules_path, const std::string& affixes_path);
  static const NormalizationTable& defaults();
};

namespace detail {

inline void parse_char_rules(std::istream& in, NormalizationTable& table) {
  for (const auto& [number, line] : data_lines(in)) {
    auto fields = split_tabs(line);
    const std::string_view src = trim_ascii(fields[0]);
    const std::string_view dst = fields.size() > 1 ? trim_ascii(fields[1]) : std::string_view{};
    if (auto dash = src.find('-'); dash != std::string_view::npos) {
      if (!dst.empty()) {
        throw Error(ErrorKind::InvalidTable,
                    "line " + std::to_string(number) + ": ranges can only be stripped");
      }
      const char32_t lo = parse_code_point(src.substr(0, dash), number);
      const char32_t hi = parse_code_point(src.substr(dash + 1), number);
      if (hi < lo) throw Error(ErrorKind::InvalidTable, "line " + std::to_string(number) + ": empty range");
      table.stripped_ranges.emplace_back(lo, hi);
      continue;
    }
    const char32_t from = parse_code_point(src, number);
    if (table.char_map.count(from)) {
      throw Error(ErrorKind::InvalidTable,
                  "line " + std::to_string(number) + ": duplicate rule for " + code_point_label(from));
    }
    if (dst.empty()) {
      table.char_map.emplace(from, std::nullopt);
    } else {
      table.char_map.emplace(from, parse_code_point(dst, number));
    }
  }
}

inline std::u32string apply_char_map(std::u32string_view text, const NormalizationTable& table) {
  std::u32string out;
  for (char32_t cp : text) {
    auto it = table.char_map.find(cp);
    if (it == table.char_map.end()) {
      out.push_back(cp);
    } else if (it->second) {
      out.push_back(*it->second);
    }
  }
  return out;
}

inline void parse_affixes(std::istream& in, NormalizationTable& table) {
  for (const auto& [number, line] : data_lines(in)) {
    auto fields = split_tabs(line);
    std::string word(trim_ascii(fields[0]));
    if (!word.empty() && word.front() == '!') {
      table.protected_words.insert(apply_char_map(utf8::decode(word.substr(1)), table));
      continue;
    }
    Affix affix;
    affix.text = apply_char_map(utf8::decode(word), table);
    if (fields.size() > 1) {
      const auto flag = trim_ascii(fields[1]);
      if (flag == "fused") {
        affix.fused = true;
      } else if (!flag.empty()) {
        throw Error(ErrorKind::InvalidTable,
                    "line " + std::to_string(number) + ": unknown flag '" + std::string(flag) + "'");
      }
    }
    table.affixes.push_back(std::move(affix));
  }
  std::stable_sort(table.affixes.begin(), table.affixes.end(),
                   [](const Affix& a, const Affix& b) { return a.text.size() > b.text.size(); });
}

}  // namespace detail

inline NormalizationTable NormalizationTable::parse(std::istream& rules, std::istream& affix_list) {
  NormalizationTable table;
  detail::parse_char_rules(rules, table);
  detail::parse_affixes(affix_list, table);
  table.validate();
  return table;
}

inline NormalizationTable NormalizationTable::load(const std::string& rules_path,
                                                   const std::string& affixes_path) {
  std::ifstream rules(rules_path);
  if (!rules) throw Error(ErrorKind::Io, "cannot open " + rules_path);
  std::ifstream affixes(affixes_path);
  if (!affixes) throw Error(ErrorKind::Io, "cannot open " + affixes_path);
  return parse(rules, affixes);
}

inline const NormalizationTable& NormalizationTable::defaults() {
  static const NormalizationTable table = [] {
    std::istringstream rules{std::string(defaults::kNormalizationRules)};
    std::istringstream affixes{std::string(defaults::kAffixes)};
    return parse(rules, affixes);
  }();
  return table;
}

struct NormalizedText {
  std::string text;
  /// Rule ids in first-fired order; empty iff `text` equals the input.
  std::vector<std::string> applied_rules;
};

namespace detail {

inline std::u32string split_fused(std::u32string_view core, const NormalizationTable& table,
                                  RuleLog& log) {
  constexpr std::size_t kMinStem = 2;
  if (table.protected_words.count(std::u32string(core)) || table.is_affix(core)) {
    return std::u32string(core);
  }
  for (const auto& affix : table.affixes) {
    if (!affix.fused || !ends_with(core, affix.text)) continue;
    if (core.size() - affix.text.size() < kMinStem) continue;
    log.fire("zwnj.split " + utf8::encode(affix.text));
    std::u32string out = split_fused(core.substr(0, core.size() - affix.text.size()), table, log);
    out.push_back(unicode::kZwnj);
    out += affix.text;
    return out;
  }
  return std::u32string(core);
}

// Fused splitting works on the pieces of a word between ZWNJs and punctuation,
// the same units the tokenizer later emits.
inline std::u32string split_word(std::u32string_view word, const NormalizationTable& table,
                                 RuleLog& log) {
  std::u32string out;
  std::size_t i = 0;
  while (i < word.size()) {
    if (word[i] == unicode::kZwnj || unicode::is_punctuation(word[i])) {
      out.push_back(word[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < word.size() && word[j] != unicode::kZwnj && !unicode::is_punctuation(word[j])) ++j;
    out += split_fused(word.substr(i, j - i), table, log);
    i = j;
  }
  return out;
}

/// Leading run of a word up to its first punctuation mark.
inline std::u32string_view head_piece(std::u32string_view word) {
  std::size_t j = 0;
  while (j < word.size() && !unicode::is_punctuation(word[j])) ++j;
  return word.substr(0, j);
}

}  // namespace detail

/// Canonicalize Persian text. Rules run in a fixed order:
///   1. code point substitution and deletion (char_map)
///   2. removal of stripped classes (harakat, TATWEEL, ...)
///   3. ZWNJ canonicalization: stray ZWNJs dropped, "word affix" joined with ZWNJ,
///      fused "wordaffix" split with ZWNJ for affixes flagged as fused
///   4. whitespace runs collapsed to one U+0020, ends trimmed
///
/// The result is a fixed point: normalize(normalize(x).text) fires no rules.
/// Throws MalformedUtf8 on invalid input.
inline NormalizedText normalize(std::string_view raw,
                                const NormalizationTable& table = NormalizationTable::defaults()) {
  using unicode::is_whitespace;
  using unicode::kZwnj;
  const std::u32string input = utf8::decode(raw);
  detail::RuleLog log;

  std::u32string text;
  text.reserve(input.size());
  for (char32_t cp : input) {
    auto it = table.char_map.find(cp);
    if (it == table.char_map.end()) {
      text.push_back(cp);
    } else if (it->second) {
      log.fire("char_map " + detail::code_point_label(cp) + "->" +
               detail::code_point_label(*it->second));
      text.push_back(*it->second);
    } else {
      log.fire("delete " + detail::code_point_label(cp));
    }
  }

  std::erase_if(text, [&](char32_t cp) {
    if (!table.is_stripped(cp)) return false;
    log.fire("strip " + detail::code_point_label(cp));
    return true;
  });

  {
    std::u32string cleaned;
    cleaned.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
      if (text[i] != kZwnj) {
        cleaned.push_back(text[i++]);
        continue;
      }
      std::size_t j = i;
      while (j < text.size() && text[j] == kZwnj) ++j;
      const bool inner = i > 0 && !is_whitespace(text[i - 1]) && j < text.size() &&
                         !is_whitespace(text[j]);
      if (inner) cleaned.push_back(kZwnj);
      if (!inner || j - i > 1) log.fire("zwnj.cleanup");
      i = j;
    }
    text = std::move(cleaned);
  }

  // Words and the whitespace runs between them (separators[i] precedes words[i]).
  std::vector<std::u32string> words;
  std::vector<std::u32string> separators;
  std::u32string trailing;
  {
    std::size_t i = 0;
    while (i < text.size()) {
      std::size_t j = i;
      while (j < text.size() && is_whitespace(text[j])) ++j;
      if (j == text.size()) {
        trailing = text.substr(i);
        break;
      }
      separators.push_back(text.substr(i, j - i));
      i = j;
      while (j < text.size() && !is_whitespace(text[j])) ++j;
      words.push_back(text.substr(i, j - i));
      i = j;
    }
  }

  std::vector<std::u32string> joined;
  std::vector<std::u32string> joined_separators;
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (!joined.empty()) {
      const auto head = detail::head_piece(words[w]);
      const char32_t left_last = joined.back().back();
      if (!head.empty() && table.is_affix(head) && !unicode::is_punctuation(left_last)) {
        log.fire("zwnj.join " + utf8::encode(head));
        joined.back().push_back(kZwnj);
        joined.back() += words[w];
        continue;
      }
    }
    joined.push_back(words[w]);
    joined_separators.push_back(separators[w]);
  }

  std::u32string result;
  result.reserve(text.size() + 8);
  bool reflowed = !trailing.empty();
  for (std::size_t w = 0; w < joined.size(); ++w) {
    if (w == 0) {
      reflowed |= !joined_separators[w].empty();
    } else {
      reflowed |= joined_separators[w] != U" ";
      result.push_back(U' ');
    }
    result += detail::split_word(joined[w], table, log);
  }
  if (reflowed) log.fire("whitespace.collapse");

  return {utf8::encode(result), log.take()};
}

struct VowelForms {
  std::u32string initial, medial, last_syllable, final;
};

/// Latin-letter Persian ("FEnglish") to Persian script. Keys are lower-case ASCII.
struct TransliterationTable {
  /// Multi-letter keys, longest first.
  std::vector<std::pair<std::string, std::u32string>> digraphs;
  std::map<char, std::u32string> singles;
  std::map<char, VowelForms> vowels;

  static TransliterationTable parse(std::istream& in);
  static TransliterationTable load(const std::string& path);
  static const TransliterationTable& defaults();
};

inline TransliterationTable TransliterationTable::parse(std::istream& in) {
  TransliterationTable table;
  auto persian = [](std::string_view field) {
    field = detail::trim_ascii(field);
    return field == "-" ? std::u32string{} : utf8::decode(field);
  };
  for (const auto& [number, line] : detail::data_lines(in)) {
    auto fields = detail::split_tabs(line);
    std::string key(detail::trim_ascii(fields[0]));
    auto bad = [&, n = number](const std::string& why) {
      return Error(ErrorKind::InvalidTable, "line " + std::to_string(n) + ": " + why);
    };
    if (!key.empty() && key.front() == '@') {
      if (key.size() != 2 || fields.size() < 5) throw bad("vowel rows need a letter and four forms");
      table.vowels[key[1]] = {persian(fields[1]), persian(fields[2]), persian(fields[3]),
                              persian(fields[4])};
      continue;
    }
    if (key.empty() || fields.size() < 2) throw bad("expected LATIN<TAB>PERSIAN");
    for (char& c : key) {
      if (!std::isalpha(static_cast<unsigned char>(c))) throw bad("keys must be Latin letters");
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (key.size() == 1) {
      table.singles[key[0]] = persian(fields[1]);
    } else {
      table.digraphs.emplace_back(key, persian(fields[1]));
    }
  }
  std::stable_sort(table.digraphs.begin(), table.digraphs.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  return table;
}

inline TransliterationTable TransliterationTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return parse(in);
}

inline const TransliterationTable& TransliterationTable::defaults() {
  static const TransliterationTable table = [] {
    std::istringstream in{std::string(defaults::kTransliteration)};
    return parse(in);
  }();
  return table;
}

namespace detail {

inline std::u32string transliterate_word(std::string_view word, const TransliterationTable& table) {
  struct Unit {
    std::u32string text;
    std::optional<char> vowel;
  };
  std::vector<Unit> units;
  for (std::size_t i = 0; i < word.size();) {
    bool matched = false;
    for (const auto& [key, value] : table.digraphs) {
      if (word.substr(i, key.size()) == key) {
        units.push_back({value, std::nullopt});
        i += key.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    const char c = word[i++];
    if (table.vowels.count(c)) {
      units.push_back({{}, c});
    } else if (auto it = table.singles.find(c); it != table.singles.end()) {
      units.push_back({it->second, std::nullopt});
    } else {
      units.push_back({std::u32string(1, static_cast<char32_t>(c)), std::nullopt});
    }
  }
  std::u32string out;
  const std::size_t last = units.empty() ? 0 : units.size() - 1;
  for (std::size_t k = 0; k < units.size(); ++k) {
    if (!units[k].vowel) {
      out += units[k].text;
      continue;
    }
    const VowelForms& forms = table.vowels.at(*units[k].vowel);
    if (k == 0) {
      out += forms.initial;
    } else if (k == last) {
      out += forms.final;
    } else if (k + 1 == last && !units[last].vowel) {
      out += forms.last_syllable;
    } else {
      out += forms.medial;
    }
  }
  return out;
}

}  // namespace detail

/// Greedy left-to-right conversion of each Latin word, then normalization.
/// Characters outside A-Z/a-z pass through unchanged.
inline std::string transliterate_fenglish(
    std::string_view latin, const TransliterationTable& table = TransliterationTable::defaults(),
    const NormalizationTable& norm = NormalizationTable::defaults()) {
  std::u32string out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out += detail::transliterate_word(word, table);
    word.clear();
  };
  for (char32_t cp : utf8::decode(latin)) {
    if (cp < 0x80 && std::isalpha(static_cast<int>(cp))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
    } else {
      flush();
      out.push_back(cp);
    }
  }
  flush();
  return normalize(utf8::encode(out), norm).text;
}

}  // namespace parsitext
