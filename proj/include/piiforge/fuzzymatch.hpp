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

// Character n-gram fuzzy matching.
//
// Strings are normalized (ASCII lowercase, characters other than letters,
// digits and spaces removed, whitespace collapsed), padded with '-' on both
// sides, and compared as trigram count vectors by cosine similarity. If either
// normalized string is shorter than three characters both sides use bigrams.
//
// Dot products and squared norms are integers, so similarity(a, b) and
// similarity(b, a) are computed from identical operands and agree exactly.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "piiforge/corpus.hpp"

namespace piiforge {

inline constexpr double kDefaultFuzzyThreshold = 0.6;

struct MatchResult {
  std::size_t candidate_index = 0;
  double score = 0.0;

  bool operator==(const MatchResult&) const = default;
};

/// Normalized form used for n-gram extraction and edit distance.
inline std::string fuzzy_normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (detail::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    bool keep = detail::is_alpha(c) || detail::is_digit(c) || u >= 0x80;
    if (!keep) continue;
    if (pending_space) out += ' ';
    pending_space = false;
    out += detail::is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

/// Sorted (gram, count) vector of a normalized string.
class GramProfile {
 public:
  GramProfile() = default;
  GramProfile(std::string_view normalized, std::size_t n) {
    std::string padded = "-" + std::string(normalized) + "-";
    std::vector<std::string> grams;
    if (padded.size() >= n) {
      for (std::size_t i = 0; i + n <= padded.size(); ++i) grams.push_back(padded.substr(i, n));
    }
    std::sort(grams.begin(), grams.end());
    for (std::size_t i = 0; i < grams.size();) {
      std::size_t j = i;
      while (j < grams.size() && grams[j] == grams[i]) ++j;
      counts_.emplace_back(grams[i], static_cast<std::int64_t>(j - i));
      norm2_ += static_cast<std::int64_t>((j - i) * (j - i));
      i = j;
    }
  }

  std::int64_t norm2() const { return norm2_; }

  std::int64_t dot(const GramProfile& other) const {
    std::int64_t sum = 0;
    auto a = counts_.begin();
    auto b = other.counts_.begin();
    while (a != counts_.end() && b != other.counts_.end()) {
      if (a->first < b->first) {
        ++a;
      } else if (b->first < a->first) {
        ++b;
      } else {
        sum += a->second * b->second;
        ++a;
        ++b;
      }
    }
    return sum;
  }

 private:
  std::vector<std::pair<std::string, std::int64_t>> counts_;
  std::int64_t norm2_ = 0;
};

/// Normalized string with both gram profiles precomputed, for repeated
/// comparisons against the same candidate.
struct FuzzyKey {
  std::string normalized;
  GramProfile bigrams;
  GramProfile trigrams;

  FuzzyKey() = default;
  explicit FuzzyKey(std::string_view text)
      : normalized(fuzzy_normalize(text)),
        bigrams(normalized, 2),
        trigrams(normalized, 3) {}
};

inline double similarity(const FuzzyKey& a, const FuzzyKey& b) {
  if (a.normalized.empty() && b.normalized.empty()) return 1.0;
  if (a.normalized.empty() || b.normalized.empty()) return 0.0;
  bool short_input = a.normalized.size() < 3 || b.normalized.size() < 3;
  const GramProfile& pa = short_input ? a.bigrams : a.trigrams;
  const GramProfile& pb = short_input ? b.bigrams : b.trigrams;
  std::int64_t dot = pa.dot(pb);
  if (dot == 0) return 0.0;
  if (dot * dot == pa.norm2() * pb.norm2()) return 1.0;
  double denom = std::sqrt(static_cast<double>(pa.norm2()) *
                           static_cast<double>(pb.norm2()));
  return std::clamp(static_cast<double>(dot) / denom, 0.0, 1.0);
}

/// Cosine similarity of padded character n-gram count vectors, in [0, 1].
inline double similarity(std::string_view a, std::string_view b) {
  return similarity(FuzzyKey(a), FuzzyKey(b));
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

/// 1 - edit_distance / max_length over normalized strings.
inline double edit_similarity(std::string_view normalized_a,
                              std::string_view normalized_b) {
  std::size_t len = std::max(normalized_a.size(), normalized_b.size());
  if (len == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(normalized_a, normalized_b)) /
                   static_cast<double>(len);
}

inline constexpr double kScoreTieWindow = 1e-6;

/// Highest-similarity candidate, if its score reaches `threshold`.
///
/// Candidates scoring within kScoreTieWindow of the best are re-ranked by
/// edit similarity, then by earlier index. The winner is chosen over all
/// candidates before the threshold is applied, so raising the threshold can
/// only turn a result into no result, never into a different candidate.
inline std::optional<MatchResult> best_match(const FuzzyKey& target,
                                             std::span<const FuzzyKey> candidates,
                                             double threshold) {
  if (candidates.empty()) return std::nullopt;
  std::vector<double> scores(candidates.size());
  double top = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = similarity(target, candidates[i]);
    top = std::max(top, scores[i]);
  }
  std::size_t winner = candidates.size();
  double winner_edit = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (scores[i] < top - kScoreTieWindow) continue;
    double e = edit_similarity(target.normalized, candidates[i].normalized);
    if (winner == candidates.size() || e > winner_edit) {
      winner = i;
      winner_edit = e;
    }
  }
  if (scores[winner] < threshold) return std::nullopt;
  return MatchResult{winner, scores[winner]};
}

inline std::optional<MatchResult> best_match(std::string_view target,
                                             std::span<const std::string> candidates,
                                             double threshold) {
  std::vector<FuzzyKey> keys;
  keys.reserve(candidates.size());
  for (const std::string& c : candidates) keys.emplace_back(c);
  return best_match(FuzzyKey(target), keys, threshold);
}

}  // namespace piiforge
