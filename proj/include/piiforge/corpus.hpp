// Copyright 2026 The pii-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Core text and annotation data model: tokens, BIO labels, entity spans,
// sentence cleaning and splitting, corpus statistics and page-level splits.
//
// All offsets are byte offsets into UTF-8 text. Bytes >= 0x80 are treated as
// word characters, so multi-byte code points are never split.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "piiforge/error.hpp"
#include "piiforge/random.hpp"

namespace piiforge {

// ---------------------------------------------------------------------------
// Tags and labels
// ---------------------------------------------------------------------------

enum class TagClass : std::uint8_t { BD, PR, SP, CH, ED };

inline constexpr std::size_t kNumTags = 5;
inline constexpr std::size_t kNumLabels = 1 + 2 * kNumTags;
inline constexpr std::array<TagClass, kNumTags> kTagClasses = {
    TagClass::BD, TagClass::PR, TagClass::SP, TagClass::CH, TagClass::ED};

constexpr std::size_t ordinal(TagClass t) { return static_cast<std::size_t>(t); }

constexpr std::string_view tag_name(TagClass t) {
  constexpr std::array<std::string_view, kNumTags> names = {"BD", "PR", "SP",
                                                            "CH", "ED"};
  return names[ordinal(t)];
}

inline std::optional<TagClass> parse_tag(std::string_view name) {
  for (TagClass t : kTagClasses) {
    if (tag_name(t) == name) return t;
  }
  return std::nullopt;
}

/// One of the eleven token labels. Index order is fixed: O first, then the
/// B_/I_ pair of each tag in TagClass order.
class BioLabel {
 public:
  constexpr BioLabel() = default;

  static constexpr BioLabel outside() { return BioLabel(); }
  static constexpr BioLabel begin(TagClass t) {
    return BioLabel(static_cast<std::uint8_t>(1 + 2 * ordinal(t)));
  }
  static constexpr BioLabel inside(TagClass t) {
    return BioLabel(static_cast<std::uint8_t>(2 + 2 * ordinal(t)));
  }
  static constexpr BioLabel from_index(std::size_t index) {
    return BioLabel(static_cast<std::uint8_t>(index));
  }

  static std::optional<BioLabel> parse(std::string_view name) {
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      if (from_index(i).name() == name) return from_index(i);
    }
    return std::nullopt;
  }

  constexpr std::size_t index() const { return index_; }
  constexpr bool is_outside() const { return index_ == 0; }
  constexpr bool is_begin() const { return index_ % 2 == 1; }
  constexpr bool is_inside() const { return index_ != 0 && index_ % 2 == 0; }

  // Precondition: !is_outside().
  constexpr TagClass tag() const {
    return static_cast<TagClass>((index_ - 1) / 2);
  }

  constexpr std::string_view name() const {
    constexpr std::array<std::string_view, kNumLabels> names = {
        "O",    "B_BD", "I_BD", "B_PR", "I_PR", "B_SP",
        "I_SP", "B_CH", "I_CH", "B_ED", "I_ED"};
    return names[index_];
  }

  constexpr auto operator<=>(const BioLabel&) const = default;

 private:
  explicit constexpr BioLabel(std::uint8_t index) : index_(index) {}

  std::uint8_t index_ = 0;
};

// ---------------------------------------------------------------------------
// Tokens, spans, sentences
// ---------------------------------------------------------------------------

struct Token {
  std::string text;
  std::size_t start = 0;  // inclusive byte offset
  std::size_t end = 0;    // exclusive byte offset

  bool operator==(const Token&) const = default;
};

/// Token range [start, end) tagged with one class.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  TagClass tag = TagClass::BD;

  std::size_t length() const { return end - start; }
  bool overlaps(const EntitySpan& other) const {
    return start < other.end && other.start < end;
  }

  auto operator<=>(const EntitySpan&) const = default;
};

inline std::size_t overlap_length(const EntitySpan& a, const EntitySpan& b) {
  std::size_t lo = std::max(a.start, b.start);
  std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

struct AnnotatedSentence {
  std::string sentence_id;
  std::string page_id;
  std::vector<Token> tokens;
  std::vector<BioLabel> labels;

  bool operator==(const AnnotatedSentence&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<AnnotatedSentence> sentences;

  bool operator==(const Corpus&) const = default;
};

/// Lays token texts out with single-space gaps, as when reading a
/// token-per-line file that does not record offsets.
inline std::vector<Token> tokens_from_texts(std::span<const std::string> texts) {
  std::vector<Token> tokens;
  tokens.reserve(texts.size());
  std::size_t offset = 0;
  for (const std::string& text : texts) {
    tokens.push_back(Token{text, offset, offset + text.size()});
    offset += text.size() + 1;
  }
  return tokens;
}

/// Surface text of tokens [start, end), with a single space wherever the
/// source had a gap.
inline std::string span_text(std::span<const Token> tokens, std::size_t start,
                             std::size_t end) {
  std::string out;
  for (std::size_t i = start; i < end; ++i) {
    if (i > start && tokens[i].start > tokens[i - 1].end) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

inline void check_unique_ids(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (const AnnotatedSentence& s : corpus.sentences) {
    if (!seen.insert(s.sentence_id).second) {
      throw DataError("duplicate sentence id '" + s.sentence_id + "' in corpus '" +
                      corpus.name + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

namespace detail {

constexpr bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

constexpr bool is_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) ||
         (u >= 123 && u <= 126);
}

constexpr bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
constexpr bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
constexpr bool is_digit(char c) { return c >= '0' && c <= '9'; }
constexpr bool is_alpha(char c) { return is_upper(c) || is_lower(c); }

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace detail

/// Splits on whitespace; every ASCII punctuation character is its own token.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (detail::is_space(c)) {
      ++i;
    } else if (detail::is_punct(c)) {
      tokens.push_back(Token{std::string(1, c), i, i + 1});
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !detail::is_space(text[j]) &&
             !detail::is_punct(text[j])) {
        ++j;
      }
      tokens.push_back(Token{std::string(text.substr(i, j - i)), i, j});
      i = j;
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Cleaning and sentence splitting
// ---------------------------------------------------------------------------

/// A cleaned sentence and, for each of its bytes, the offset of the byte in
/// the original page text it came from.
struct CleanSentence {
  std::string text;
  std::vector<std::size_t> source;

  std::size_t source_begin() const { return source.front(); }
  std::size_t source_end() const { return source.back() + 1; }
};

namespace detail {

// Length of a bracketed citation marker starting at text[pos] == '[', or 0.
// Recognized: [12], [a], [note 3], [nb 1], [citation needed] and other
// "[... needed]" maintenance tags.
inline std::size_t citation_length(std::string_view text, std::size_t pos) {
  std::size_t close = text.find(']', pos + 1);
  if (close == std::string_view::npos || close - pos > 40) return 0;
  std::string_view inner = text.substr(pos + 1, close - pos - 1);
  if (inner.empty() || inner.find('[') != std::string_view::npos ||
      inner.find('\n') != std::string_view::npos) {
    return 0;
  }
  auto all_digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
  };
  bool marker = all_digits(inner) ||
                (inner.size() == 1 && is_lower(inner[0])) ||
                (inner.starts_with("note ") && all_digits(inner.substr(5))) ||
                (inner.starts_with("nb ") && all_digits(inner.substr(3))) ||
                inner.ends_with(" needed");
  return marker ? close - pos + 1 : 0;
}

// Length of a UTF-8 superscript digit at pos, or 0.
inline std::size_t superscript_digit_length(std::string_view text,
                                            std::size_t pos) {
  auto at = [&](std::size_t k) {
    return pos + k < text.size() ? static_cast<unsigned char>(text[pos + k])
                                 : 0u;
  };
  // U+00B2, U+00B3, U+00B9
  if (at(0) == 0xC2 && (at(1) == 0xB2 || at(1) == 0xB3 || at(1) == 0xB9)) {
    return 2;
  }
  // U+2070, U+2074..U+2079
  if (at(0) == 0xE2 && at(1) == 0x81 && (at(2) == 0xB0 || (at(2) >= 0xB4 && at(2) <= 0xB9))) {
    return 3;
  }
  return 0;
}

inline bool is_abbreviation(std::string_view word) {
  static const std::set<std::string_view> kAbbreviations = {
      "Dr",   "Mr",  "Mrs",  "Ms",  "Prof", "St",   "Jr",  "Sr",  "Gen",
      "Col",  "Lt",  "Sgt",  "Capt", "Rev", "Hon",  "Gov", "Sen", "Rep",
      "Pres", "Inc", "Ltd",  "Co",  "Corp", "No",   "vs",  "Mt",  "Ft",
      "Jan",  "Feb", "Mar",  "Apr", "Jun",  "Jul",  "Aug", "Sep", "Sept",
      "Oct",  "Nov", "Dec",  "approx", "ca", "cf", "al"};
  if (kAbbreviations.contains(word)) return true;
  // Initials ("J. Smith") and dotted forms ("U.S.", "e.g.").
  if (word.size() == 1 && is_upper(word[0])) return true;
  return word.find('.') != std::string_view::npos;
}

}  // namespace detail

/// Removes citation markers and superscript footnote numerals, collapses
/// whitespace, and splits into sentences at '.', '!' or '?' followed by
/// whitespace and an uppercase letter. A '.' ending a known abbreviation or
/// an initial does not end a sentence. Digits in running text are kept.
inline std::vector<CleanSentence> clean_and_split(std::string_view text) {
  // Pass 1: cleaned character stream with source offsets.
  std::string clean;
  std::vector<std::size_t> source;
  clean.reserve(text.size());
  source.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '[') {
      if (std::size_t n = detail::citation_length(text, i)) {
        i += n;
        continue;
      }
    }
    if (std::size_t n = detail::superscript_digit_length(text, i)) {
      i += n;
      continue;
    }
    if (detail::is_space(c)) {
      if (!clean.empty() && clean.back() != ' ') {
        clean += ' ';
        source.push_back(i);
      }
      ++i;
      continue;
    }
    clean += c;
    source.push_back(i);
    ++i;
  }

  // Pass 2: sentence boundaries.
  std::vector<CleanSentence> sentences;
  auto emit = [&](std::size_t from, std::size_t to) {
    while (from < to && clean[from] == ' ') ++from;
    while (to > from && clean[to - 1] == ' ') --to;
    if (from == to) return;
    CleanSentence s;
    s.text = clean.substr(from, to - from);
    s.source.assign(source.begin() + static_cast<std::ptrdiff_t>(from),
                    source.begin() + static_cast<std::ptrdiff_t>(to));
    sentences.push_back(std::move(s));
  };

  std::size_t begin = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    char c = clean[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < clean.size() && (clean[j] == '"' || clean[j] == '\'' ||
                                clean[j] == ')' || clean[j] == ']')) {
      ++j;
    }
    if (j >= clean.size()) break;  // tail is flushed below
    if (clean[j] != ' ' || j + 1 >= clean.size() ||
        !detail::is_upper(clean[j + 1])) {
      continue;
    }
    if (c == '.') {
      std::size_t w = i;
      while (w > begin && clean[w - 1] != ' ') --w;
      std::string_view word(clean.data() + w, i - w);
      while (!word.empty() && !detail::is_alpha(word.front()) &&
             !detail::is_digit(word.front())) {
        word.remove_prefix(1);
      }
      if (!word.empty() && detail::is_abbreviation(word)) continue;
    }
    emit(begin, j);
    begin = j;
  }
  emit(begin, clean.size());
  return sentences;
}

// ---------------------------------------------------------------------------
// BIO codec
// ---------------------------------------------------------------------------

/// Throws SpanConflictError on empty, out-of-bounds or overlapping spans.
inline void validate_spans(std::size_t length, std::span<const EntitySpan> spans) {
  std::vector<EntitySpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const EntitySpan& s = sorted[i];
    if (s.start >= s.end || s.end > length) {
      throw SpanConflictError("span [" + std::to_string(s.start) + "," +
                              std::to_string(s.end) + ") out of bounds for " +
                              std::to_string(length) + " tokens");
    }
    if (i > 0 && sorted[i - 1].end > s.start) {
      throw SpanConflictError("spans [" + std::to_string(sorted[i - 1].start) +
                              "," + std::to_string(sorted[i - 1].end) +
                              ") and [" + std::to_string(s.start) + "," +
                              std::to_string(s.end) + ") overlap");
    }
  }
}

inline std::vector<BioLabel> spans_to_bio(std::size_t length,
                                          std::span<const EntitySpan> spans) {
  validate_spans(length, spans);
  std::vector<BioLabel> labels(length);
  for (const EntitySpan& s : spans) {
    labels[s.start] = BioLabel::begin(s.tag);
    for (std::size_t i = s.start + 1; i < s.end; ++i) {
      labels[i] = BioLabel::inside(s.tag);
    }
  }
  return labels;
}

inline std::vector<BioLabel> spans_to_bio(std::span<const Token> tokens,
                                          std::span<const EntitySpan> spans) {
  return spans_to_bio(tokens.size(), spans);
}

struct BioDecoding {
  std::vector<EntitySpan> spans;
  std::size_t repairs = 0;  // dangling I_ labels treated as B_
};

/// Maximal B_t I_t* runs become spans. An I_t after O or after a different
/// tag opens a new span, and is counted as a repair.
inline BioDecoding bio_to_spans(std::span<const BioLabel> labels) {
  BioDecoding out;
  std::optional<EntitySpan> open;
  auto close = [&](std::size_t at) {
    if (open) {
      open->end = at;
      out.spans.push_back(*open);
      open.reset();
    }
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    BioLabel label = labels[i];
    if (label.is_outside()) {
      close(i);
    } else if (label.is_begin()) {
      close(i);
      open = EntitySpan{i, i, label.tag()};
    } else if (!open || open->tag != label.tag()) {
      close(i);
      open = EntitySpan{i, i, label.tag()};
      ++out.repairs;
    }
  }
  close(labels.size());
  return out;
}

inline BioDecoding bio_to_spans(std::span<const Token> tokens,
                                std::span<const BioLabel> labels) {
  if (tokens.size() != labels.size()) {
    throw DataError("token/label length mismatch: " +
                    std::to_string(tokens.size()) + " tokens, " +
                    std::to_string(labels.size()) + " labels");
  }
  return bio_to_spans(labels);
}

inline std::vector<EntitySpan> sentence_spans(const AnnotatedSentence& s) {
  return bio_to_spans(s.tokens, s.labels).spans;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct CorpusStats {
  std::array<std::size_t, kNumTags> mentions{};
  std::size_t sentences = 0;
  std::size_t sentences_with_entities = 0;
  std::size_t pages = 0;
  std::size_t tokens = 0;
  std::size_t repairs = 0;

  bool operator==(const CorpusStats&) const = default;
};

inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  std::unordered_set<std::string> pages;
  for (const AnnotatedSentence& s : corpus.sentences) {
    BioDecoding decoded = bio_to_spans(s.tokens, s.labels);
    for (const EntitySpan& span : decoded.spans) ++stats.mentions[ordinal(span.tag)];
    if (!decoded.spans.empty()) ++stats.sentences_with_entities;
    stats.repairs += decoded.repairs;
    stats.tokens += s.tokens.size();
    ++stats.sentences;
    pages.insert(s.page_id);
  }
  stats.pages = pages.size();
  return stats;
}

// ---------------------------------------------------------------------------
// Page-level splitting
// ---------------------------------------------------------------------------

/// Page ids in order of first appearance.
inline std::vector<std::string> page_order(const Corpus& corpus) {
  std::vector<std::string> pages;
  std::unordered_set<std::string> seen;
  for (const AnnotatedSentence& s : corpus.sentences) {
    if (seen.insert(s.page_id).second) pages.push_back(s.page_id);
  }
  return pages;
}

/// Sentences of the listed pages, in corpus order.
inline Corpus select_pages(const Corpus& corpus,
                           const std::unordered_set<std::string>& pages,
                           std::string name) {
  Corpus out{std::move(name), {}};
  for (const AnnotatedSentence& s : corpus.sentences) {
    if (pages.contains(s.page_id)) out.sentences.push_back(s);
  }
  return out;
}

struct CorpusSplit {
  Corpus train;
  Corpus validation;
  Corpus test;
};

/// Page counts for each part: floor of ratio * pages, with the remaining pages
/// given to the largest fractional parts (earlier parts win ties).
inline std::array<std::size_t, 3> split_sizes(std::size_t pages,
                                              const std::array<double, 3>& ratios) {
  double sum = 0;
  for (double r : ratios) {
    if (!(r > 0) || !std::isfinite(r)) {
      throw RatioError("split ratios must be positive");
    }
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw RatioError("split ratios must sum to 1, got " + std::to_string(sum));
  }
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    double exact = ratios[i] * static_cast<double>(pages);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < pages) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i) {
      if (frac[i] > frac[best] + 1e-12) best = i;
    }
    ++counts[best];
    frac[best] = -1;
    ++assigned;
  }
  return counts;
}

/// Deterministic page-granular split into train/validation/test.
inline CorpusSplit split_corpus(const Corpus& corpus,
                                const std::array<double, 3>& ratios,
                                std::uint64_t seed) {
  std::vector<std::string> pages = page_order(corpus);
  std::array<std::size_t, 3> sizes = split_sizes(pages.size(), ratios);
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(pages));

  std::array<std::unordered_set<std::string>, 3> parts;
  std::size_t next = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t k = 0; k < sizes[p]; ++k) parts[p].insert(pages[next++]);
  }
  return CorpusSplit{select_pages(corpus, parts[0], corpus.name + ".train"),
                     select_pages(corpus, parts[1], corpus.name + ".validation"),
                     select_pages(corpus, parts[2], corpus.name + ".test")};
}

}  // namespace piiforge
