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

// Date patterns shared by infobox birth-date extraction and DATE candidate
// spans. Patterns are matched over tokens, in this order:
//
//   1. "D Month YYYY"     12 April 1980
//   2. "Month D, YYYY"    April 12, 1980   (comma optional)
//   3. "YYYY-MM-DD"       1980-04-12       (no gaps between tokens)
//   4. bare "YYYY"        only when none of the above matched anywhere
//
// Month names are the twelve full English names, case-insensitive.

#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "piiforge/corpus.hpp"

namespace piiforge {

enum class DatePattern { kDayMonthYear, kMonthDayYear, kIso, kBareYear };

struct DateMatch {
  std::size_t start = 0;  // token range [start, end)
  std::size_t end = 0;
  DatePattern pattern = DatePattern::kBareYear;

  bool operator==(const DateMatch&) const = default;
};

namespace detail {

inline bool all_digits(std::string_view s, std::size_t min_len, std::size_t max_len) {
  return s.size() >= min_len && s.size() <= max_len &&
         std::all_of(s.begin(), s.end(), is_digit);
}

inline int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

inline bool is_month(std::string_view s) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  std::string lower = to_lower(s);
  return std::find(kMonths.begin(), kMonths.end(), lower) != kMonths.end();
}

inline bool is_day(std::string_view s) {
  if (!all_digits(s, 1, 2)) return false;
  int d = to_int(s);
  return d >= 1 && d <= 31;
}

inline bool is_year(std::string_view s) { return all_digits(s, 4, 4); }

inline bool is_month_number(std::string_view s) {
  return all_digits(s, 2, 2) && to_int(s) >= 1 && to_int(s) <= 12;
}

inline bool is_day_number(std::string_view s) {
  return all_digits(s, 2, 2) && to_int(s) >= 1 && to_int(s) <= 31;
}

// Length in tokens of a rich date pattern starting at i, or 0.
inline std::size_t rich_date_at(std::span<const Token> t, std::size_t i,
                                DatePattern& pattern) {
  auto text = [&](std::size_t k) -> std::string_view {
    return i + k < t.size() ? std::string_view(t[i + k].text) : std::string_view();
  };
  auto adjacent = [&](std::size_t k) {  // no gap between token i+k and i+k+1
    return i + k + 1 < t.size() && t[i + k].end == t[i + k + 1].start;
  };
  if (is_day(text(0)) && is_month(text(1)) && is_year(text(2))) {
    pattern = DatePattern::kDayMonthYear;
    return 3;
  }
  if (is_month(text(0)) && is_day(text(1))) {
    if (text(2) == "," && is_year(text(3))) {
      pattern = DatePattern::kMonthDayYear;
      return 4;
    }
    if (is_year(text(2))) {
      pattern = DatePattern::kMonthDayYear;
      return 3;
    }
  }
  if (is_year(text(0)) && text(1) == "-" && is_month_number(text(2)) &&
      text(3) == "-" && is_day_number(text(4)) && adjacent(0) && adjacent(1) &&
      adjacent(2) && adjacent(3)) {
    pattern = DatePattern::kIso;
    return 5;
  }
  return 0;
}

}  // namespace detail

/// Non-overlapping date matches, leftmost first.
inline std::vector<DateMatch> find_dates(std::span<const Token> tokens,
                                         bool allow_bare_years = true) {
  std::vector<DateMatch> matches;
  for (std::size_t i = 0; i < tokens.size();) {
    DatePattern pattern{};
    if (std::size_t n = detail::rich_date_at(tokens, i, pattern)) {
      matches.push_back(DateMatch{i, i + n, pattern});
      i += n;
    } else {
      ++i;
    }
  }
  if (matches.empty() && allow_bare_years) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (detail::is_year(tokens[i].text)) {
        matches.push_back(DateMatch{i, i + 1, DatePattern::kBareYear});
      }
    }
  }
  return matches;
}

/// Date phrases found in the values of a birth-date field. Text that is not
/// part of a date (birthplace, age, birth name) is dropped. Bare years are
/// used only if no value contains a richer date.
inline std::vector<std::string> extract_birth_date(std::span<const std::string> values) {
  std::vector<std::string> rich;
  std::vector<std::string> years;
  auto add = [](std::vector<std::string>& out, std::string s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  };
  for (const std::string& value : values) {
    std::vector<Token> tokens = tokenize(value);
    for (const DateMatch& m : find_dates(tokens, /*allow_bare_years=*/false)) {
      std::size_t from = tokens[m.start].start;
      std::size_t to = tokens[m.end - 1].end;
      add(rich, value.substr(from, to - from));
    }
    for (const Token& t : tokens) {
      if (detail::is_year(t.text)) add(years, t.text);
    }
  }
  return rich.empty() ? years : rich;
}

}  // namespace piiforge
