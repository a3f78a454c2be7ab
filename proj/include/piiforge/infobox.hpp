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

// Infobox extraction: the first <table class="... infobox ..."> of a page is
// read into raw key/value entries, and the keys are normalized into the five
// PII tags.

#pragma once

#include <array>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "piiforge/corpus.hpp"
#include "piiforge/dates.hpp"
#include "piiforge/html.hpp"

namespace piiforge {

struct RawInfobox {
  std::string page_id;
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;

  bool operator==(const RawInfobox&) const = default;
};

struct PiiRecord {
  std::string page_id;
  std::array<std::vector<std::string>, kNumTags> phrases;

  std::vector<std::string>& operator[](TagClass t) { return phrases[ordinal(t)]; }
  const std::vector<std::string>& operator[](TagClass t) const {
    return phrases[ordinal(t)];
  }
  bool empty() const {
    for (const auto& p : phrases) {
      if (!p.empty()) return false;
    }
    return true;
  }
  std::size_t phrase_count() const {
    std::size_t n = 0;
    for (const auto& p : phrases) n += p.size();
    return n;
  }

  bool operator==(const PiiRecord&) const = default;
};

namespace detail {

inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (is_space(c)) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

inline std::string strip_citations(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '[') {
      if (std::size_t n = citation_length(s, i)) {
        i += n;
        continue;
      }
    }
    out += s[i++];
  }
  return out;
}

// Values of a value cell: list items, line breaks and block elements separate
// values; hidden elements and reference markers are skipped.
inline std::vector<std::string> cell_values(const html::Node& cell) {
  std::vector<std::string> values;
  std::string current;
  auto flush = [&]() {
    std::string v = collapse_whitespace(strip_citations(current));
    if (!v.empty()) values.push_back(std::move(v));
    current.clear();
  };
  std::function<void(const html::Node&)> walk = [&](const html::Node& n) {
    if (n.is_text) {
      current += n.text;
      return;
    }
    if (html::is_hidden(n) || html::is_reference_marker(n)) return;
    if (n.name == "br") {
      flush();
      return;
    }
    bool block = n.name == "li" || n.name == "div" || n.name == "p" ||
                 n.name == "ul" || n.name == "ol" || n.name == "tr";
    if (block) flush();
    for (const html::Node& child : n.children) walk(child);
    if (block) flush();
  };
  for (const html::Node& child : cell.children) walk(child);
  flush();
  return values;
}

// Direct and tbody-nested rows of `table`, not descending into nested tables.
inline void collect_rows(const html::Node& node, std::vector<const html::Node*>& rows) {
  for (const html::Node& child : node.children) {
    if (child.is_text || child.name == "table") continue;
    if (child.name == "tr") {
      rows.push_back(&child);
    } else {
      collect_rows(child, rows);
    }
  }
}

}  // namespace detail

/// Reads the first infobox table of a page. Throws NoInfoboxError if the page
/// has none.
inline RawInfobox parse_infobox(std::string_view page_html, std::string page_id) {
  html::Node doc = html::parse(page_html);
  const html::Node* table = html::find_first(doc, [](const html::Node& n) {
    return !n.is_text && n.name == "table" &&
           detail::to_lower(n.attr("class")).find("infobox") != std::string::npos;
  });
  if (table == nullptr) {
    throw NoInfoboxError("no infobox table in page '" + page_id + "'");
  }

  RawInfobox raw{std::move(page_id), {}};
  std::vector<const html::Node*> rows;
  detail::collect_rows(*table, rows);
  for (const html::Node* row : rows) {
    const html::Node* header = nullptr;
    const html::Node* value = nullptr;
    for (const html::Node& cell : row->children) {
      if (cell.is_text) continue;
      if (cell.name == "th" && header == nullptr) header = &cell;
      if (cell.name == "td" && header != nullptr && value == nullptr) value = &cell;
    }
    if (header == nullptr) continue;
    std::string key = detail::collapse_whitespace(
        detail::strip_citations(html::text_content(*header, /*visible_only=*/true)));
    if (key.empty()) continue;
    std::vector<std::string> values;
    if (value != nullptr) values = detail::cell_values(*value);
    raw.entries.emplace_back(std::move(key), std::move(values));
  }
  return raw;
}

namespace detail {

// Case-insensitive, whitespace-trimmed key form; typographic apostrophes are
// folded to ASCII.
inline std::string key_form(std::string_view key) {
  std::string folded;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key.compare(i, 3, "\xE2\x80\x99") == 0) {
      folded += '\'';
      i += 2;
    } else {
      folded += key[i];
    }
  }
  return to_lower(collapse_whitespace(folded));
}

inline const std::map<std::string, TagClass>& infobox_key_map() {
  static const std::map<std::string, TagClass> kMap = [] {
    std::map<std::string, TagClass> m;
    auto add = [&](TagClass t, std::initializer_list<const char*> keys) {
      for (const char* k : keys) m.emplace(key_form(k), t);
    };
    add(TagClass::BD, {"Born", "Born:"});
    add(TagClass::PR, {"Parent", "Parent(s)", "Parents", "Father", "Father's name",
                       "Mother", "Mother's name"});
    add(TagClass::SP, {"Spouse", "Spouse(s)", "Spouses"});
    add(TagClass::CH, {"Children"});
    add(TagClass::ED, {"Education", "High school", "High school:", "Law School",
                       "School", "Schools", "College", "College(s)", "Colleges",
                       "Alma mater", "Almat mater"});
    return m;
  }();
  return kMap;
}

inline std::string strip_parentheticals(std::string_view s) {
  std::string out;
  int depth = 0;
  for (char c : s) {
    if (c == '(') {
      ++depth;
    } else if (c == ')' && depth > 0) {
      --depth;
    } else if (depth == 0) {
      out += c;
    }
  }
  std::string v = collapse_whitespace(out);
  while (!v.empty() && (v.back() == ',' || v.back() == ';' || v.back() == ' ')) {
    v.pop_back();
  }
  return v;
}

inline bool has_letter(std::string_view s) {
  for (char c : s) {
    if (is_alpha(c) || static_cast<unsigned char>(c) >= 0x80) return true;
  }
  return false;
}

}  // namespace detail

/// Tag for an infobox key, if the key is one of the recognized ones.
inline std::optional<TagClass> infobox_key_tag(std::string_view key) {
  const auto& map = detail::infobox_key_map();
  auto it = map.find(detail::key_form(key));
  if (it == map.end()) return std::nullopt;
  return it->second;
}

/// Maps recognized keys to tags and cleans their values. Birth-date values are
/// reduced to date phrases; parenthetical notes such as "(m. 2001)" are
/// removed from parent, spouse and child names. Phrases are deduplicated
/// case-insensitively, first occurrence wins.
inline PiiRecord normalize_keys(const RawInfobox& raw) {
  PiiRecord record;
  record.page_id = raw.page_id;
  std::array<std::vector<std::string>, kNumTags> seen;  // lowercased
  auto add = [&](TagClass t, std::string phrase) {
    if (phrase.empty()) return;
    std::string key = detail::to_lower(phrase);
    auto& s = seen[ordinal(t)];
    if (std::find(s.begin(), s.end(), key) != s.end()) return;
    s.push_back(std::move(key));
    record[t].push_back(std::move(phrase));
  };
  for (const auto& [key, values] : raw.entries) {
    std::optional<TagClass> tag = infobox_key_tag(key);
    if (!tag) continue;
    switch (*tag) {
      case TagClass::BD:
        for (std::string& date : extract_birth_date(values)) add(*tag, std::move(date));
        break;
      case TagClass::PR:
      case TagClass::SP:
      case TagClass::CH:
        for (const std::string& v : values) {
          std::string name = detail::strip_parentheticals(v);
          if (detail::has_letter(name)) add(*tag, std::move(name));
        }
        break;
      case TagClass::ED:
        for (const std::string& v : values) {
          std::string name = detail::collapse_whitespace(v);
          if (detail::has_letter(name)) add(*tag, std::move(name));
        }
        break;
    }
  }
  return record;
}

/// Renders a record back into infobox entries under canonical keys.
inline RawInfobox to_raw_infobox(const PiiRecord& record) {
  static constexpr std::array<std::string_view, kNumTags> kCanonical = {
      "Born", "Parents", "Spouse(s)", "Children", "Alma mater"};
  RawInfobox raw{record.page_id, {}};
  for (TagClass t : kTagClasses) {
    if (!record[t].empty()) {
      raw.entries.emplace_back(std::string(kCanonical[ordinal(t)]), record[t]);
    }
  }
  return raw;
}

inline nlohmann::ordered_json to_json(const PiiRecord& record) {
  nlohmann::ordered_json j;
  j["page_id"] = record.page_id;
  for (TagClass t : kTagClasses) j[std::string(tag_name(t))] = record[t];
  return j;
}

inline PiiRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("page_id") || !j["page_id"].is_string()) {
    throw DataError("record is not an object with a string page_id");
  }
  PiiRecord record;
  record.page_id = j["page_id"].get<std::string>();
  for (TagClass t : kTagClasses) {
    std::string name(tag_name(t));
    if (!j.contains(name)) continue;
    const auto& list = j[name];
    if (!list.is_array()) throw DataError("record field " + name + " is not an array");
    for (const auto& phrase : list) {
      if (!phrase.is_string()) throw DataError("record field " + name + " holds a non-string");
      if (!phrase.get<std::string>().empty()) record[t].push_back(phrase.get<std::string>());
    }
  }
  return record;
}

/// Parses one record per line. Blank lines are ignored.
inline std::vector<PiiRecord> read_records(std::istream& in) {
  std::vector<PiiRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("invalid record JSON: ") + e.what());
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return records;
}

inline void write_records(std::span<const PiiRecord> records, std::ostream& out) {
  for (const PiiRecord& r : records) out << to_json(r).dump() << '\n';
}

/// Body text of a page: the text of every <p> outside tables, one paragraph
/// per line. Reference markers stay in the text; sentence cleaning removes
/// them.
inline std::string extract_body_text(std::string_view page_html) {
  html::Node doc = html::parse(page_html);
  std::string body;
  html::visit(doc, [&](const html::Node& n) {
    if (n.is_text) return false;
    if (n.name == "table" || n.name == "script" || n.name == "style") return false;
    if (n.name == "p") {
      if (!body.empty()) body += '\n';
      body += html::text_content(n);
      return false;
    }
    return true;
  });
  return body;
}

}  // namespace piiforge
