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

// Human review of machine annotations.
//
// ReviewState is a pure fold over ReviewDecisions. Each sentence holds a list
// of entities: the machine entities it started with plus any added by a
// reviewer. An entity's current span may be cleared (rejected) or replaced
// (corrected); the gold annotation of a sentence is the set of current spans.
//
// A decision's target names an entity by span. It resolves to the entity
// whose current span equals the target, or failing that, to the machine
// entity whose original span equals it, so a later decision on a rejected
// or corrected machine entity supersedes the earlier one.
//
// The decision log is append-only JSONL; replaying it from the machine
// corpus reproduces the state.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "piiforge/corpus.hpp"

namespace piiforge {

enum class ReviewAction { kConfirm, kReject, kCorrect, kAdd };

inline constexpr std::string_view action_name(ReviewAction a) {
  switch (a) {
    case ReviewAction::kConfirm: return "CONFIRM";
    case ReviewAction::kReject: return "REJECT";
    case ReviewAction::kCorrect: return "CORRECT";
    case ReviewAction::kAdd: return "ADD";
  }
  return "?";
}

inline std::optional<ReviewAction> parse_action(std::string_view name) {
  for (ReviewAction a : {ReviewAction::kConfirm, ReviewAction::kReject, ReviewAction::kCorrect,
                         ReviewAction::kAdd}) {
    if (action_name(a) == name) return a;
  }
  return std::nullopt;
}

/// A span whose tag may be absent, meaning "not an entity" (label O).
struct ReviewSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<TagClass> tag;

  bool operator==(const ReviewSpan&) const = default;
};

struct ReviewDecision {
  std::string decision_id;
  std::string sentence_id;
  ReviewAction action = ReviewAction::kConfirm;
  std::optional<EntitySpan> target;  // CONFIRM, REJECT, CORRECT
  std::optional<ReviewSpan> span;    // CORRECT replacement, ADD
  std::string annotator;
  std::int64_t timestamp = 0;

  bool operator==(const ReviewDecision&) const = default;
};

namespace detail {

inline nlohmann::ordered_json span_json(std::size_t start, std::size_t end,
                                        std::string_view tag) {
  nlohmann::ordered_json j;
  j["start"] = start;
  j["end"] = end;
  j["tag"] = tag;
  return j;
}

inline std::size_t json_index(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number_integer() || j[field].get<std::int64_t>() < 0) {
    throw ReviewError(std::string("span field '") + field + "' must be a non-negative integer");
  }
  return j[field].get<std::size_t>();
}

inline ReviewSpan review_span_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ReviewError("span must be an object");
  ReviewSpan s{json_index(j, "start"), json_index(j, "end"), std::nullopt};
  if (!j.contains("tag") || !j["tag"].is_string()) throw ReviewError("span needs a string tag");
  std::string tag = j["tag"].get<std::string>();
  if (tag != "O") {
    s.tag = parse_tag(tag);
    if (!s.tag) throw ReviewError("unknown tag '" + tag + "'");
  }
  return s;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ReviewDecision& d) {
  nlohmann::ordered_json j;
  j["decision_id"] = d.decision_id;
  j["sentence_id"] = d.sentence_id;
  j["action"] = action_name(d.action);
  if (d.target) j["target"] = detail::span_json(d.target->start, d.target->end, tag_name(d.target->tag));
  if (d.span) {
    j["span"] = detail::span_json(d.span->start, d.span->end,
                                  d.span->tag ? tag_name(*d.span->tag) : "O");
  }
  j["annotator"] = d.annotator;
  j["timestamp"] = d.timestamp;
  return j;
}

/// Parses a decision and checks its shape (not its validity against a
/// state). Throws ReviewError.
inline ReviewDecision decision_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ReviewError("decision must be a JSON object");
  auto str = [&](const char* field, bool required) -> std::string {
    if (!j.contains(field)) {
      if (required) throw ReviewError(std::string("missing field '") + field + "'");
      return "";
    }
    if (!j[field].is_string()) throw ReviewError(std::string("field '") + field + "' must be a string");
    return j[field].get<std::string>();
  };
  ReviewDecision d;
  d.decision_id = str("decision_id", false);
  d.sentence_id = str("sentence_id", true);
  std::string action = str("action", true);
  auto a = parse_action(action);
  if (!a) throw ReviewError("unknown action '" + action + "'");
  d.action = *a;
  d.annotator = str("annotator", false);
  if (j.contains("timestamp")) {
    if (!j["timestamp"].is_number_integer()) throw ReviewError("timestamp must be an integer");
    d.timestamp = j["timestamp"].get<std::int64_t>();
  }
  if (j.contains("target") && !j["target"].is_null()) {
    ReviewSpan t = detail::review_span_from_json(j["target"]);
    if (!t.tag) throw ReviewError("target must carry an entity tag");
    d.target = EntitySpan{t.start, t.end, *t.tag};
  }
  if (j.contains("span") && !j["span"].is_null()) d.span = detail::review_span_from_json(j["span"]);

  switch (d.action) {
    case ReviewAction::kConfirm:
      break;
    case ReviewAction::kReject:
      if (!d.target) throw ReviewError("REJECT needs a target");
      break;
    case ReviewAction::kCorrect:
      if (!d.target || !d.span) throw ReviewError("CORRECT needs a target and a span");
      break;
    case ReviewAction::kAdd:
      if (!d.span || !d.span->tag) throw ReviewError("ADD needs a span with an entity tag");
      break;
  }
  return d;
}

enum class ReviewStatus { kPending, kDone };

struct ReviewEntity {
  EntitySpan original;
  std::optional<EntitySpan> current;
  bool machine = true;
  bool decided = false;

  bool operator==(const ReviewEntity&) const = default;
};

struct ReviewSentence {
  AnnotatedSentence sentence;  // machine labels
  std::vector<ReviewEntity> entities;
  std::size_t decisions = 0;

  ReviewStatus status() const {
    if (decisions == 0) return ReviewStatus::kPending;
    for (const ReviewEntity& e : entities) {
      if (!e.decided) return ReviewStatus::kPending;
    }
    return ReviewStatus::kDone;
  }

  std::vector<EntitySpan> machine_spans() const {
    std::vector<EntitySpan> out;
    for (const ReviewEntity& e : entities) {
      if (e.machine) out.push_back(e.original);
    }
    return out;
  }

  /// Current entity spans, sorted.
  std::vector<EntitySpan> gold_spans() const {
    std::vector<EntitySpan> out;
    for (const ReviewEntity& e : entities) {
      if (e.current) out.push_back(*e.current);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool operator==(const ReviewSentence&) const = default;
};

class ReviewState {
 public:
  ReviewState() = default;

  explicit ReviewState(const Corpus& machine) : name_(machine.name) {
    for (const AnnotatedSentence& s : machine.sentences) {
      if (index_.count(s.sentence_id)) {
        throw DataError("duplicate sentence id '" + s.sentence_id + "'");
      }
      index_.emplace(s.sentence_id, sentences_.size());
      ReviewSentence rs{s, {}, 0};
      for (const EntitySpan& span : bio_to_spans(s.tokens, s.labels).spans) {
        rs.entities.push_back(ReviewEntity{span, span, true, false});
      }
      sentences_.push_back(std::move(rs));
    }
  }

  const std::vector<ReviewSentence>& sentences() const { return sentences_; }
  const ReviewSentence* find(std::string_view sentence_id) const {
    auto it = index_.find(std::string(sentence_id));
    return it == index_.end() ? nullptr : &sentences_[it->second];
  }
  std::size_t applied() const { return applied_; }

  std::size_t done_count() const {
    std::size_t n = 0;
    for (const ReviewSentence& s : sentences_) n += s.status() == ReviewStatus::kDone;
    return n;
  }

  /// Applies `d`, or throws ReviewError and leaves the state unchanged.
  void apply(const ReviewDecision& d) {
    auto it = index_.find(d.sentence_id);
    if (it == index_.end()) throw ReviewError("unknown sentence '" + d.sentence_id + "'");
    ReviewSentence updated = sentences_[it->second];
    const std::size_t n_tokens = updated.sentence.tokens.size();

    auto check_bounds = [&](std::size_t start, std::size_t end) {
      if (start >= end || end > n_tokens) {
        throw ReviewError("span [" + std::to_string(start) + ", " + std::to_string(end) +
                          ") is out of bounds for a sentence of " + std::to_string(n_tokens) +
                          " tokens");
      }
    };
    auto resolve = [&](const EntitySpan& target) -> ReviewEntity& {
      for (ReviewEntity& e : updated.entities) {
        if (e.current && *e.current == target) return e;
      }
      for (ReviewEntity& e : updated.entities) {
        if (e.machine && e.original == target) return e;
      }
      throw ReviewError("no entity [" + std::to_string(target.start) + ", " +
                        std::to_string(target.end) + ") " + std::string(tag_name(target.tag)) +
                        " in sentence '" + d.sentence_id + "'");
    };

    if (d.target) check_bounds(d.target->start, d.target->end);
    if (d.span) check_bounds(d.span->start, d.span->end);

    switch (d.action) {
      case ReviewAction::kConfirm:
        if (d.target) {
          ReviewEntity& e = resolve(*d.target);
          if (!e.current || *e.current != *d.target) e.current = e.original;
          e.decided = true;
        } else {
          for (ReviewEntity& e : updated.entities) e.decided = true;
        }
        break;
      case ReviewAction::kReject: {
        ReviewEntity& e = resolve(*d.target);
        e.current.reset();
        e.decided = true;
        break;
      }
      case ReviewAction::kCorrect: {
        ReviewEntity& e = resolve(*d.target);
        if (d.span->tag) {
          e.current = EntitySpan{d.span->start, d.span->end, *d.span->tag};
        } else {
          e.current.reset();
        }
        e.decided = true;
        break;
      }
      case ReviewAction::kAdd: {
        EntitySpan s{d.span->start, d.span->end, *d.span->tag};
        updated.entities.push_back(ReviewEntity{s, s, false, true});
        break;
      }
    }

    std::vector<EntitySpan> gold = updated.gold_spans();
    for (std::size_t i = 1; i < gold.size(); ++i) {
      if (gold[i - 1].overlaps(gold[i])) {
        throw ReviewError("decision would create overlapping entities in sentence '" +
                          d.sentence_id + "'");
      }
    }
    ++updated.decisions;
    sentences_[it->second] = std::move(updated);
    ++applied_;
  }

  /// Sentences rendered with their current gold spans. With only_done,
  /// sentences still pending are left out.
  Corpus export_gold(bool only_done) const {
    Corpus out;
    out.name = name_.empty() ? "gold" : name_ + ".gold";
    for (const ReviewSentence& s : sentences_) {
      if (only_done && s.status() != ReviewStatus::kDone) continue;
      AnnotatedSentence g = s.sentence;
      g.labels = spans_to_bio(g.tokens, s.gold_spans());
      out.sentences.push_back(std::move(g));
    }
    return out;
  }

  bool operator==(const ReviewState& o) const {
    return sentences_ == o.sentences_ && applied_ == o.applied_;
  }

 private:
  std::string name_;
  std::vector<ReviewSentence> sentences_;
  std::map<std::string, std::size_t> index_;
  std::size_t applied_ = 0;
};

inline ReviewState apply_decision(ReviewState state, const ReviewDecision& d) {
  state.apply(d);
  return state;
}

inline Corpus export_gold(const ReviewState& state, bool only_done) {
  return state.export_gold(only_done);
}

// ---------------------------------------------------------------------------
// Decision log
// ---------------------------------------------------------------------------

/// Replays the log at `path` (a missing file is an empty log) onto `state`.
/// Throws LogCorruptionError carrying the byte offset just past the last
/// valid line if a line is incomplete, unparsable or rejected.
inline std::size_t replay_log(const std::string& path, ReviewState& state) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  std::size_t offset = 0;
  std::size_t count = 0;
  while (offset < data.size()) {
    std::size_t nl = data.find('\n', offset);
    if (nl == std::string::npos) {
      throw LogCorruptionError(offset, "incomplete final line in decision log '" + path + "'");
    }
    std::string_view line(data.data() + offset, nl - offset);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        state.apply(decision_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw LogCorruptionError(offset, "unparsable decision in '" + path + "': " + e.what());
      } catch (const ReviewError& e) {
        throw LogCorruptionError(offset, "invalid decision in '" + path + "': " + e.what());
      }
      ++count;
    }
    offset = nl + 1;
  }
  return count;
}

/// Append-only decision log. append() returns once the line is flushed and
/// synced to disk.
class DecisionLog {
 public:
  explicit DecisionLog(std::string path) : path_(std::move(path)) {
    file_ = std::fopen(path_.c_str(), "ab");
    if (file_ == nullptr) throw DataError("cannot open decision log '" + path_ + "'");
  }
  DecisionLog(const DecisionLog&) = delete;
  DecisionLog& operator=(const DecisionLog&) = delete;
  ~DecisionLog() {
    if (file_ != nullptr) std::fclose(file_);
  }

  void append(const ReviewDecision& d) {
    std::string line = to_json(d).dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
        std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0) {
      throw DataError("write to decision log '" + path_ + "' failed");
    }
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
};

}  // namespace piiforge
