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

// Small forgiving HTML parser, enough for saved Wikipedia-style pages: builds
// an element tree, decodes character references, closes implied end tags for
// li/tr/td/th/p, skips comments, doctype, script and style.

#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "piiforge/corpus.hpp"

namespace piiforge::html {

struct Node {
  bool is_text = false;
  std::string name;  // lowercase tag name; empty for text nodes
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // decoded text, for text nodes
  std::vector<Node> children;

  std::string_view attr(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return v;
    }
    return {};
  }
  bool has_attr(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return true;
    }
    return false;
  }
  bool has_class(std::string_view cls) const {
    std::string_view classes = attr("class");
    std::size_t pos = 0;
    while (pos < classes.size()) {
      std::size_t end = classes.find(' ', pos);
      if (end == std::string_view::npos) end = classes.size();
      if (classes.substr(pos, end - pos) == cls) return true;
      pos = end + 1;
    }
    return false;
  }
};

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp <= 0x10FFFF) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline bool is_void_element(std::string_view name) {
  static constexpr std::string_view kVoid[] = {
      "area", "base", "br",   "col",   "embed",  "hr",    "img",
      "input", "link", "meta", "param", "source", "track", "wbr"};
  for (std::string_view v : kVoid) {
    if (v == name) return true;
  }
  return false;
}

}  // namespace detail

/// Decodes named (common subset) and numeric character references.
/// &nbsp; becomes a plain space.
inline std::string decode_entities(std::string_view s) {
  static const std::pair<std::string_view, std::string_view> kNamed[] = {
      {"amp", "&"},        {"lt", "<"},          {"gt", ">"},
      {"quot", "\""},      {"apos", "'"},        {"nbsp", " "},
      {"ndash", "–"}, {"mdash", "—"},  {"rsquo", "’"},
      {"lsquo", "‘"}, {"ldquo", "“"},  {"rdquo", "”"},
      {"hellip", "…"}, {"middot", "·"}, {"thinsp", " "},
      {"ensp", " "},       {"emsp", " "}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += s[i++];
      continue;
    }
    std::string_view ref = s.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (!ref.empty() && ref[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
      std::string_view digits = ref.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char c : digits) {
        int v;
        if (c >= '0' && c <= '9') {
          v = c - '0';
        } else if (hex && c >= 'a' && c <= 'f') {
          v = c - 'a' + 10;
        } else if (hex && c >= 'A' && c <= 'F') {
          v = c - 'A' + 10;
        } else {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) {
          ok = false;
          break;
        }
      }
      if (ok) {
        if (cp == 0xA0) cp = ' ';
        detail::append_utf8(out, cp);
        decoded = true;
      }
    } else {
      for (const auto& [name, value] : kNamed) {
        if (ref == name) {
          out += value;
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out += s[i++];
    }
  }
  return out;
}

/// Parses a page or fragment into a tree rooted at a synthetic "#document"
/// element.
inline Node parse(std::string_view html) {
  Node root;
  root.name = "#document";
  std::vector<Node*> stack{&root};

  auto lower = [](std::string_view s) { return piiforge::detail::to_lower(s); };
  auto is_name_char = [](char c) {
    return piiforge::detail::is_alpha(c) || piiforge::detail::is_digit(c) ||
           c == '-' || c == ':' || c == '_';
  };
  auto add_text = [&](std::string_view raw) {
    if (raw.empty()) return;
    Node* top = stack.back();
    if (!top->children.empty() && top->children.back().is_text) {
      top->children.back().text += decode_entities(raw);
      return;
    }
    Node text;
    text.is_text = true;
    text.text = decode_entities(raw);
    top->children.push_back(std::move(text));
  };
  // Index of the nearest open element named `name`, searching no further
  // than any element in `fences`.
  auto find_open = [&](std::string_view name,
                       std::initializer_list<std::string_view> fences) -> std::size_t {
    for (std::size_t k = stack.size(); k-- > 1;) {
      if (stack[k]->name == name) return k;
      for (std::string_view f : fences) {
        if (stack[k]->name == f) return 0;
      }
    }
    return 0;
  };
  auto pop_to = [&](std::size_t k) {  // pops stack[k] and everything above
    if (k > 0) stack.resize(k);
  };

  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      std::size_t next = html.find('<', i);
      if (next == std::string_view::npos) next = html.size();
      add_text(html.substr(i, next - i));
      i = next;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      std::size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      std::size_t end = html.find('>', i);
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    bool closing = i + 1 < html.size() && html[i + 1] == '/';
    std::size_t name_start = i + (closing ? 2 : 1);
    std::size_t j = name_start;
    while (j < html.size() && is_name_char(html[j])) ++j;
    if (j == name_start) {
      add_text(html.substr(i, 1));
      ++i;
      continue;
    }
    std::string name = lower(html.substr(name_start, j - name_start));

    // Attributes.
    std::vector<std::pair<std::string, std::string>> attributes;
    bool self_closing = false;
    while (j < html.size() && html[j] != '>') {
      char c = html[j];
      if (piiforge::detail::is_space(c)) {
        ++j;
      } else if (c == '/') {
        self_closing = true;
        ++j;
      } else {
        std::size_t k = j;
        while (k < html.size() && !piiforge::detail::is_space(html[k]) &&
               html[k] != '=' && html[k] != '>' && html[k] != '/') {
          ++k;
        }
        std::string key = lower(html.substr(j, k - j));
        std::string value;
        while (k < html.size() && piiforge::detail::is_space(html[k])) ++k;
        if (k < html.size() && html[k] == '=') {
          ++k;
          while (k < html.size() && piiforge::detail::is_space(html[k])) ++k;
          if (k < html.size() && (html[k] == '"' || html[k] == '\'')) {
            char quote = html[k];
            std::size_t close = html.find(quote, k + 1);
            if (close == std::string_view::npos) close = html.size();
            value = decode_entities(html.substr(k + 1, close - k - 1));
            k = std::min(close + 1, html.size());
          } else {
            std::size_t v = k;
            while (k < html.size() && !piiforge::detail::is_space(html[k]) &&
                   html[k] != '>') {
              ++k;
            }
            value = decode_entities(html.substr(v, k - v));
          }
        }
        if (k == j) ++k;  // stray character
        if (!key.empty()) attributes.emplace_back(std::move(key), std::move(value));
        j = k;
      }
    }
    i = j < html.size() ? j + 1 : html.size();

    if (closing) {
      std::size_t k = 0;
      for (std::size_t s = stack.size(); s-- > 1;) {
        if (stack[s]->name == name) {
          k = s;
          break;
        }
      }
      pop_to(k);
      continue;
    }

    // Implied end tags.
    if (name == "li") {
      pop_to(find_open("li", {"ul", "ol"}));
    } else if (name == "tr") {
      pop_to(find_open("tr", {"table", "tbody", "thead", "tfoot"}));
    } else if (name == "td" || name == "th") {
      pop_to(std::max(find_open("td", {"tr", "table"}),
                      find_open("th", {"tr", "table"})));
    } else if (name == "p") {
      pop_to(find_open("p", {"div", "td", "th", "li", "table", "body"}));
    }

    Node element;
    element.name = name;
    element.attributes = std::move(attributes);
    Node* parent = stack.back();
    parent->children.push_back(std::move(element));
    Node* opened = &parent->children.back();

    if (name == "script" || name == "style") {
      std::string close_tag = "</" + name;
      std::size_t end = i;
      while (true) {
        end = html.find("</", end);
        if (end == std::string_view::npos) break;
        if (lower(html.substr(end, close_tag.size())) == close_tag) break;
        end += 2;
      }
      if (end == std::string_view::npos) {
        i = html.size();
      } else {
        std::size_t gt = html.find('>', end);
        i = gt == std::string_view::npos ? html.size() : gt + 1;
      }
      continue;
    }
    if (!self_closing && !detail::is_void_element(name)) stack.push_back(opened);
  }
  return root;
}

/// True for elements that do not render: display:none, visibility:hidden,
/// the hidden attribute, and sort-key spans.
inline bool is_hidden(const Node& node) {
  if (node.is_text) return false;
  if (node.has_attr("hidden") || node.has_class("sortkey") ||
      node.has_class("hidden")) {
    return true;
  }
  std::string style;
  for (char c : node.attr("style")) {
    if (!piiforge::detail::is_space(c)) {
      style += piiforge::detail::is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c;
    }
  }
  return style.find("display:none") != std::string::npos ||
         style.find("visibility:hidden") != std::string::npos;
}

inline bool is_reference_marker(const Node& node) {
  return !node.is_text && (node.has_class("reference") ||
                           (node.name == "sup" && node.has_class("noprint")));
}

/// Depth-first pre-order visit; returning false from `fn` skips the subtree.
inline void visit(const Node& node, const std::function<bool(const Node&)>& fn) {
  if (!fn(node)) return;
  for (const Node& child : node.children) visit(child, fn);
}

inline const Node* find_first(const Node& root,
                              const std::function<bool(const Node&)>& pred) {
  const Node* found = nullptr;
  visit(root, [&](const Node& n) {
    if (found) return false;
    if (pred(n)) {
      found = &n;
      return false;
    }
    return true;
  });
  return found;
}

/// Concatenated text of a subtree. When `visible_only`, hidden elements and
/// reference markers are skipped.
inline std::string text_content(const Node& node, bool visible_only = false) {
  std::string out;
  visit(node, [&](const Node& n) {
    if (n.is_text) {
      out += n.text;
      return false;
    }
    if (visible_only && (is_hidden(n) || is_reference_marker(n))) return false;
    if (n.name == "br") out += '\n';
    return true;
  });
  return out;
}

}  // namespace piiforge::html
