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

// Token-per-line corpus files.
//
//   #page=<page id>          before the first sentence of each page
//   #sent=<sentence id>      before every sentence
//   TOKEN<TAB>LABEL          one line per token
//                            blank line after every sentence
//
// Labels are O, B_BD, I_BD, B_PR, I_PR, B_SP, I_SP, B_CH, I_CH, B_ED, I_ED.
// "#sent=" lines are optional on input; a sentence without one gets the id
// "<page id>#<index within page>". Token offsets are not stored; tokens read
// back are laid out with single-space gaps.

#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "piiforge/corpus.hpp"

namespace piiforge {

inline void write_conll(const Corpus& corpus, std::ostream& out) {
  const std::string* current_page = nullptr;
  for (const AnnotatedSentence& s : corpus.sentences) {
    if (s.tokens.size() != s.labels.size()) {
      throw DataError("sentence '" + s.sentence_id +
                      "' has mismatched token and label counts");
    }
    if (current_page == nullptr || *current_page != s.page_id) {
      out << "#page=" << s.page_id << '\n';
      current_page = &s.page_id;
    }
    out << "#sent=" << s.sentence_id << '\n';
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i].text << '\t' << s.labels[i].name() << '\n';
    }
    out << '\n';
  }
}

inline std::string write_conll(const Corpus& corpus) {
  std::ostringstream out;
  write_conll(corpus, out);
  return out.str();
}

inline void write_conll(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_conll(corpus, out);
  if (!out) throw DataError("write to '" + path + "' failed");
}

inline Corpus read_conll(std::istream& in, std::string name) {
  Corpus corpus{std::move(name), {}};
  std::string page_id;
  std::size_t page_index = 0;
  std::optional<std::string> sentence_id;
  std::vector<std::string> texts;
  std::vector<BioLabel> labels;
  std::size_t line_no = 0;

  auto flush = [&]() {
    if (texts.empty() && !sentence_id) return;
    AnnotatedSentence s;
    s.sentence_id = sentence_id ? *sentence_id
                                : page_id + "#" + std::to_string(page_index);
    s.page_id = page_id;
    s.tokens = tokens_from_texts(texts);
    s.labels = std::move(labels);
    corpus.sentences.push_back(std::move(s));
    ++page_index;
    sentence_id.reset();
    texts.clear();
    labels.clear();
  };

  auto fail = [&](const std::string& what) {
    throw ParseError(line_no, corpus.name + ": " + what);
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      std::string_view view(line);
      if (view.starts_with("#page=")) {
        if (!texts.empty()) fail("page marker inside a sentence");
        page_id = std::string(view.substr(6));
        page_index = 0;
        sentence_id.reset();
      } else if (view.starts_with("#sent=")) {
        if (!texts.empty()) fail("sentence marker inside a sentence");
        sentence_id = std::string(view.substr(6));
      } else {
        fail("expected TOKEN<TAB>LABEL, got '" + line + "'");
      }
      continue;
    }
    std::string token = line.substr(0, tab);
    std::string label_name = line.substr(tab + 1);
    if (token.empty()) fail("empty token");
    std::optional<BioLabel> label = BioLabel::parse(label_name);
    if (!label) {
      throw LabelError(line_no, corpus.name + ": unknown label '" + label_name + "'");
    }
    texts.push_back(std::move(token));
    labels.push_back(*label);
  }
  flush();
  check_unique_ids(corpus);
  return corpus;
}

inline Corpus read_conll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_conll(in, path);
}

inline Corpus parse_conll(std::string_view text, std::string name = "corpus") {
  std::istringstream in{std::string(text)};
  return read_conll(in, std::move(name));
}

}  // namespace piiforge
