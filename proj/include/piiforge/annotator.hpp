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

// Automatic annotation of page text from a PiiRecord.
//
// Each sentence yields typed candidate spans (from the built-in heuristic
// provider or a sidecar file). For every record phrase, the candidates of the
// categories configured for its tag are fuzzy-matched against the phrase and
// the best one above threshold is claimed. Overlapping claims are resolved by
// score, then span length, then tag order.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "piiforge/corpus.hpp"
#include "piiforge/dates.hpp"
#include "piiforge/fuzzymatch.hpp"
#include "piiforge/infobox.hpp"

namespace piiforge {

enum class CandidateCategory : std::uint8_t { kPerson, kOrg, kDate, kNounChunk };

inline constexpr std::array<CandidateCategory, 4> kCandidateCategories = {
    CandidateCategory::kPerson, CandidateCategory::kOrg, CandidateCategory::kDate,
    CandidateCategory::kNounChunk};

constexpr std::string_view category_name(CandidateCategory c) {
  constexpr std::array<std::string_view, 4> names = {"PERSON", "ORG", "DATE",
                                                     "NOUN_CHUNK"};
  return names[static_cast<std::size_t>(c)];
}

inline std::optional<CandidateCategory> parse_category(std::string_view name) {
  for (CandidateCategory c : kCandidateCategories) {
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

struct CandidateSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  CandidateCategory category = CandidateCategory::kNounChunk;

  auto operator<=>(const CandidateSpan&) const = default;
};

struct AnnotationConfig {
  double fuzzy_threshold = kDefaultFuzzyThreshold;
  std::array<std::vector<CandidateCategory>, kNumTags> category_map = {{
      {CandidateCategory::kDate},    // BD
      {CandidateCategory::kPerson},  // PR
      {CandidateCategory::kPerson},  // SP
      {CandidateCategory::kPerson},  // CH
      {CandidateCategory::kOrg},     // ED
  }};
  bool keep_empty_sentences = false;

  void validate() const {
    if (!(fuzzy_threshold >= 0.0 && fuzzy_threshold <= 1.0)) {
      throw ConfigError("fuzzy threshold must be in [0, 1]");
    }
    for (TagClass t : kTagClasses) {
      if (category_map[ordinal(t)].empty()) {
        throw ConfigError("no candidate categories for tag " + std::string(tag_name(t)));
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Candidate providers
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_capitalized(std::string_view token) {
  return !token.empty() && is_upper(token[0]);
}

inline bool is_connector(std::string_view token) {
  return token == "of" || token == "the" || token == "de" || token == "van" ||
         token == "von";
}

// Capitalized words that open sentences or clauses but never start a name.
inline bool is_leading_function_word(std::string_view token) {
  static const std::set<std::string_view> kWords = {
      "A",      "After",  "An",     "And",   "As",    "At",     "Before",
      "Born",   "Both",   "But",    "By",    "During", "For",   "Following",
      "From",   "He",     "Her",    "His",   "I",     "In",     "It",
      "Its",    "Later",  "On",     "She",   "Since", "That",   "The",
      "Their",  "Then",   "There",  "These", "They",  "This",   "Those",
      "We",     "When",   "While",  "With",  "Together", "Upon", "Of"};
  return kWords.contains(token);
}

inline bool has_institution_keyword(std::span<const Token> tokens, std::size_t start,
                                    std::size_t end) {
  static const std::set<std::string_view> kKeywords = {
      "University", "College", "School", "Institute", "Academy"};
  for (std::size_t i = start; i < end; ++i) {
    if (kKeywords.contains(tokens[i].text)) return true;
  }
  return false;
}

}  // namespace detail

/// Built-in heuristic candidates:
///   NOUN_CHUNK  every maximal run of capitalized tokens; "of", "the", "de",
///               "van", "von" may join two capitalized tokens, and "." may
///               follow a single-letter initial
///   PERSON      the same runs with leading function words ("He", "In", ...)
///               removed
///   ORG         PERSON runs containing University, College, School,
///               Institute or Academy
///   DATE        date pattern matches
inline std::vector<CandidateSpan> extract_candidates(std::span<const Token> tokens) {
  std::vector<CandidateSpan> out;
  const std::size_t n = tokens.size();
  std::size_t i = 0;
  while (i < n) {
    if (!detail::is_capitalized(tokens[i].text)) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;  // exclusive end of the run so far
    std::size_t j = i + 1;
    while (j < n) {
      const std::string& t = tokens[j].text;
      if (detail::is_capitalized(t)) {
        end = ++j;
      } else if (detail::is_connector(t) || (t == "." && tokens[j - 1].text.size() == 1 &&
                                             detail::is_upper(tokens[j - 1].text[0]) &&
                                             tokens[j - 1].end == tokens[j].start)) {
        ++j;  // joins only if a capitalized token follows
      } else {
        break;
      }
    }
    out.push_back(CandidateSpan{i, end, CandidateCategory::kNounChunk});
    std::size_t s = i;
    while (s < end && (detail::is_leading_function_word(tokens[s].text) ||
                       !detail::is_capitalized(tokens[s].text))) {
      ++s;
    }
    if (s < end) {
      out.push_back(CandidateSpan{s, end, CandidateCategory::kPerson});
      if (detail::has_institution_keyword(tokens, s, end)) {
        out.push_back(CandidateSpan{s, end, CandidateCategory::kOrg});
      }
    }
    i = end;
  }
  for (const DateMatch& d : find_dates(tokens)) {
    out.push_back(CandidateSpan{d.start, d.end, CandidateCategory::kDate});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Source of candidate spans for a sentence. Must be safe to call
/// concurrently.
using CandidateProvider = std::function<std::vector<CandidateSpan>(
    std::string_view sentence_id, std::span<const Token> tokens)>;

inline CandidateProvider heuristic_candidates() {
  return [](std::string_view, std::span<const Token> tokens) {
    return extract_candidates(tokens);
  };
}

/// Precomputed candidates read from a sidecar file, one JSON object per
/// sentence:
///   {"sentence_id": "...", "candidates": [{"start": 0, "end": 2,
///                                          "category": "PERSON"}, ...]}
/// Sentences absent from the file have no candidates.
class SidecarCandidates {
 public:
  static SidecarCandidates read(std::istream& in) {
    SidecarCandidates sidecar;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        nlohmann::json j = nlohmann::json::parse(line);
        std::string id = j.at("sentence_id").get<std::string>();
        std::vector<CandidateSpan> spans;
        for (const auto& c : j.at("candidates")) {
          auto category = parse_category(c.at("category").get<std::string>());
          if (!category) {
            throw ParseError(line_no, "unknown candidate category " + c.at("category").dump());
          }
          auto start = c.at("start").get<std::size_t>();
          auto end = c.at("end").get<std::size_t>();
          if (start >= end) throw ParseError(line_no, "empty candidate span");
          spans.push_back(CandidateSpan{start, end, *category});
        }
        std::sort(spans.begin(), spans.end());
        if (!sidecar.by_sentence_.emplace(std::move(id), std::move(spans)).second) {
          throw ParseError(line_no, "duplicate sentence_id in sidecar");
        }
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("invalid sidecar JSON: ") + e.what());
      }
    }
    return sidecar;
  }

  std::size_t size() const { return by_sentence_.size(); }

  /// The returned provider shares this object's data; keep it alive.
  CandidateProvider provider() const {
    return [this](std::string_view sentence_id, std::span<const Token> tokens) {
      auto it = by_sentence_.find(std::string(sentence_id));
      if (it == by_sentence_.end()) return std::vector<CandidateSpan>{};
      for (const CandidateSpan& c : it->second) {
        if (c.end > tokens.size()) {
          throw DataError("sidecar candidate [" + std::to_string(c.start) + "," +
                          std::to_string(c.end) + ") out of bounds in sentence '" +
                          std::string(sentence_id) + "'");
        }
      }
      return it->second;
    };
  }

 private:
  std::unordered_map<std::string, std::vector<CandidateSpan>> by_sentence_;
};

// ---------------------------------------------------------------------------
// Entity location
// ---------------------------------------------------------------------------

struct EntityClaim {
  EntitySpan span;
  double score = 0.0;
  std::size_t phrase_index = 0;  // index into record[span.tag]
};

struct LocatedEntities {
  std::vector<EntitySpan> spans;     // accepted, sorted by start
  std::vector<EntityClaim> claims;   // every accepted claim, one per phrase
};

inline LocatedEntities locate_entities_detailed(std::span<const Token> tokens,
                                                std::span<const CandidateSpan> candidates,
                                                const PiiRecord& record,
                                                const AnnotationConfig& config) {
  std::vector<EntityClaim> claims;
  for (TagClass tag : kTagClasses) {
    const auto& phrases = record[tag];
    if (phrases.empty()) continue;
    const auto& wanted = config.category_map[ordinal(tag)];
    auto select = [&](auto pred) {
      std::vector<std::pair<std::size_t, std::size_t>> spans;
      for (const CandidateSpan& c : candidates) {
        if (!pred(c.category)) continue;
        std::pair<std::size_t, std::size_t> s{c.start, c.end};
        if (std::find(spans.begin(), spans.end(), s) == spans.end()) spans.push_back(s);
      }
      return spans;
    };
    auto pool = select([&](CandidateCategory c) {
      return std::find(wanted.begin(), wanted.end(), c) != wanted.end();
    });
    if (pool.empty()) {
      pool = select([](CandidateCategory c) { return c == CandidateCategory::kNounChunk; });
    }
    if (pool.empty()) continue;
    std::vector<FuzzyKey> keys;
    keys.reserve(pool.size());
    for (auto [s, e] : pool) keys.emplace_back(span_text(tokens, s, e));
    for (std::size_t p = 0; p < phrases.size(); ++p) {
      std::optional<MatchResult> m =
          best_match(FuzzyKey(phrases[p]), keys, config.fuzzy_threshold);
      if (!m) continue;
      auto [s, e] = pool[m->candidate_index];
      claims.push_back(EntityClaim{EntitySpan{s, e, tag}, m->score, p});
    }
  }

  std::stable_sort(claims.begin(), claims.end(), [](const EntityClaim& a, const EntityClaim& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.span.length() != b.span.length()) return a.span.length() > b.span.length();
    if (a.span.tag != b.span.tag) return a.span.tag < b.span.tag;
    return a.span.start < b.span.start;
  });

  LocatedEntities out;
  for (const EntityClaim& claim : claims) {
    bool same = false;
    bool conflict = false;
    for (const EntitySpan& s : out.spans) {
      if (s == claim.span) {
        same = true;
      } else if (s.overlaps(claim.span)) {
        conflict = true;
      }
    }
    if (conflict) continue;
    if (!same) out.spans.push_back(claim.span);
    out.claims.push_back(claim);
  }
  std::sort(out.spans.begin(), out.spans.end());
  return out;
}

/// Non-overlapping entity spans located in one sentence.
inline std::vector<EntitySpan> locate_entities(std::span<const Token> tokens,
                                               std::span<const CandidateSpan> candidates,
                                               const PiiRecord& record,
                                               const AnnotationConfig& config) {
  return locate_entities_detailed(tokens, candidates, record, config).spans;
}

// ---------------------------------------------------------------------------
// Page annotation
// ---------------------------------------------------------------------------

struct AnnotationStats {
  std::array<std::size_t, kNumTags> phrases{};    // record phrases per tag
  std::array<std::size_t, kNumTags> located{};    // phrases claimed at least once
  std::array<std::size_t, kNumTags> unlocated{};
  std::array<std::size_t, kNumTags> spans{};      // emitted spans per tag
  std::size_t pages = 0;
  std::size_t sentences_total = 0;
  std::size_t sentences_kept = 0;

  AnnotationStats& operator+=(const AnnotationStats& o) {
    for (std::size_t t = 0; t < kNumTags; ++t) {
      phrases[t] += o.phrases[t];
      located[t] += o.located[t];
      unlocated[t] += o.unlocated[t];
      spans[t] += o.spans[t];
    }
    pages += o.pages;
    sentences_total += o.sentences_total;
    sentences_kept += o.sentences_kept;
    return *this;
  }

  bool operator==(const AnnotationStats&) const = default;
};

inline nlohmann::ordered_json to_json(const AnnotationStats& stats) {
  nlohmann::ordered_json j;
  j["pages"] = stats.pages;
  j["sentences_total"] = stats.sentences_total;
  j["sentences_kept"] = stats.sentences_kept;
  for (TagClass t : kTagClasses) {
    std::size_t k = ordinal(t);
    j["tags"][std::string(tag_name(t))] = {{"phrases", stats.phrases[k]},
                                           {"located", stats.located[k]},
                                           {"unlocated", stats.unlocated[k]},
                                           {"spans", stats.spans[k]}};
  }
  return j;
}

struct AnnotatedPage {
  std::vector<AnnotatedSentence> sentences;
  AnnotationStats stats;
};

/// Splits, tokenizes and annotates one page. Sentence ids are
/// "<page_id>:<index>" with the index counting every sentence of the page,
/// kept or not.
inline AnnotatedPage annotate_page(std::string_view page_text, const PiiRecord& record,
                                   const AnnotationConfig& config,
                                   const CandidateProvider& provider = heuristic_candidates()) {
  config.validate();
  AnnotatedPage page;
  if (record.empty() && !config.keep_empty_sentences) return page;

  page.stats.pages = 1;
  std::array<std::vector<bool>, kNumTags> located;
  for (TagClass t : kTagClasses) {
    located[ordinal(t)].assign(record[t].size(), false);
    page.stats.phrases[ordinal(t)] = record[t].size();
  }

  std::vector<CleanSentence> sentences = clean_and_split(page_text);
  for (std::size_t index = 0; index < sentences.size(); ++index) {
    std::vector<Token> tokens = tokenize(sentences[index].text);
    if (tokens.empty()) continue;
    ++page.stats.sentences_total;
    std::string sentence_id = record.page_id + ":" + std::to_string(index);
    std::vector<CandidateSpan> candidates = provider(sentence_id, tokens);
    LocatedEntities found = locate_entities_detailed(tokens, candidates, record, config);
    for (const EntityClaim& c : found.claims) located[ordinal(c.span.tag)][c.phrase_index] = true;
    if (found.spans.empty() && !config.keep_empty_sentences) continue;
    for (const EntitySpan& s : found.spans) ++page.stats.spans[ordinal(s.tag)];
    AnnotatedSentence out;
    out.sentence_id = std::move(sentence_id);
    out.page_id = record.page_id;
    out.labels = spans_to_bio(tokens, found.spans);
    out.tokens = std::move(tokens);
    page.sentences.push_back(std::move(out));
    ++page.stats.sentences_kept;
  }
  for (TagClass t : kTagClasses) {
    auto& flags = located[ordinal(t)];
    std::size_t hit = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    page.stats.located[ordinal(t)] = hit;
    page.stats.unlocated[ordinal(t)] = flags.size() - hit;
  }
  return page;
}

struct PageInput {
  std::string text;
  PiiRecord record;
};

/// Annotates pages independently on up to `threads` worker threads. The
/// output is in input order and does not depend on the thread count.
inline std::vector<AnnotatedPage> annotate_pages(std::span<const PageInput> pages,
                                                 const AnnotationConfig& config,
                                                 const CandidateProvider& provider,
                                                 unsigned threads = 1) {
  config.validate();
  std::vector<AnnotatedPage> results(pages.size());
  std::vector<std::exception_ptr> errors(pages.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < pages.size(); i = next++) {
      try {
        results[i] = annotate_page(pages[i].text, pages[i].record, config, provider);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pages.size())));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace piiforge
