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

// Entity-level scoring under four schemes, from strictest to most lenient:
//
//   strict   full credit iff tag and boundaries match
//   exact    full credit iff boundaries match, tag ignored
//   type     full credit iff strict; half credit iff same tag and overlap
//   partial  full credit iff strict; half credit iff overlap, tag ignored
//
// Predictions and gold entities are paired one-to-one per sentence by greedy
// overlap; unpaired predictions are spurious and unpaired gold entities are
// missed. precision = credit / n_pred and recall = credit / n_gold.

#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "piiforge/corpus.hpp"

namespace piiforge {

enum class Scheme : std::uint8_t { kStrict, kExact, kType, kPartial };

inline constexpr std::size_t kNumSchemes = 4;
inline constexpr std::array<Scheme, kNumSchemes> kSchemes = {
    Scheme::kStrict, Scheme::kExact, Scheme::kType, Scheme::kPartial};

constexpr std::size_t ordinal(Scheme s) { return static_cast<std::size_t>(s); }

constexpr std::string_view scheme_name(Scheme s) {
  constexpr std::array<std::string_view, kNumSchemes> names = {"strict", "exact", "type",
                                                               "partial"};
  return names[ordinal(s)];
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : kSchemes) {
    if (scheme_name(s) == name) return s;
  }
  return std::nullopt;
}

/// Credit in {0, 0.5, 1} for a prediction scored against one gold entity.
constexpr double pair_credit(const EntitySpan& pred, const EntitySpan& gold, Scheme scheme) {
  const bool same_bounds = pred.start == gold.start && pred.end == gold.end;
  const bool same_tag = pred.tag == gold.tag;
  const bool overlap = pred.start < gold.end && gold.start < pred.end;
  switch (scheme) {
    case Scheme::kStrict:
      return same_bounds && same_tag ? 1.0 : 0.0;
    case Scheme::kExact:
      return same_bounds ? 1.0 : 0.0;
    case Scheme::kType:
      return same_bounds && same_tag ? 1.0 : (same_tag && overlap ? 0.5 : 0.0);
    case Scheme::kPartial:
      return same_bounds && same_tag ? 1.0 : (overlap ? 0.5 : 0.0);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Pairing
// ---------------------------------------------------------------------------

struct EntityPair {
  std::size_t pred = 0;  // index into the prediction list
  std::size_t gold = 0;  // index into the gold list

  bool operator==(const EntityPair&) const = default;
};

struct EntityMatching {
  std::vector<EntityPair> pairs;
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_golds;

  bool operator==(const EntityMatching&) const = default;
};

/// Greedy one-to-one pairing within a sentence. Pairs are taken in order of
/// descending overlap length, then earlier gold start, then same-tag first.
/// Remaining ties are broken on span values rather than list positions, so
/// the paired spans do not depend on input order. Disjoint spans are never
/// paired.
inline EntityMatching match_entities(std::span<const EntitySpan> preds,
                                     std::span<const EntitySpan> golds) {
  struct Candidate {
    std::size_t overlap;
    std::size_t pred;
    std::size_t gold;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < golds.size(); ++g) {
      std::size_t ov = overlap_length(preds[p], golds[g]);
      if (ov > 0) candidates.push_back(Candidate{ov, p, g});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    const EntitySpan& ga = golds[a.gold];
    const EntitySpan& gb = golds[b.gold];
    if (ga.start != gb.start) return ga.start < gb.start;
    bool ta = preds[a.pred].tag == ga.tag;
    bool tb = preds[b.pred].tag == gb.tag;
    if (ta != tb) return ta;
    if (ga != gb) return ga < gb;
    if (preds[a.pred] != preds[b.pred]) return preds[a.pred] < preds[b.pred];
    if (a.gold != b.gold) return a.gold < b.gold;
    return a.pred < b.pred;
  });

  EntityMatching m;
  std::vector<bool> pred_used(preds.size(), false);
  std::vector<bool> gold_used(golds.size(), false);
  for (const Candidate& c : candidates) {
    if (pred_used[c.pred] || gold_used[c.gold]) continue;
    pred_used[c.pred] = gold_used[c.gold] = true;
    m.pairs.push_back(EntityPair{c.pred, c.gold});
  }
  for (std::size_t p = 0; p < preds.size(); ++p) {
    if (!pred_used[p]) m.unmatched_preds.push_back(p);
  }
  for (std::size_t g = 0; g < golds.size(); ++g) {
    if (!gold_used[g]) m.unmatched_golds.push_back(g);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Counting and scoring
// ---------------------------------------------------------------------------

struct CreditCounts {
  double credit = 0.0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;

  CreditCounts& operator+=(const CreditCounts& o) {
    credit += o.credit;
    n_pred += o.n_pred;
    n_gold += o.n_gold;
    return *this;
  }
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;
  double credit = 0.0;
};

/// Both sides empty scores 1.0; one side empty scores 0.0.
inline Prf to_prf(const CreditCounts& c) {
  Prf r;
  r.n_pred = c.n_pred;
  r.n_gold = c.n_gold;
  r.credit = c.credit;
  if (c.n_pred == 0 && c.n_gold == 0) {
    r.precision = r.recall = r.f1 = 1.0;
    return r;
  }
  r.precision = c.n_pred > 0 ? c.credit / static_cast<double>(c.n_pred) : 0.0;
  r.recall = c.n_gold > 0 ? c.credit / static_cast<double>(c.n_gold) : 0.0;
  r.f1 = r.precision + r.recall > 0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

/// Credit totals per (scheme, class) and per scheme overall.
///
/// For strict and type, predictions count toward their own class. Exact and
/// partial ignore tags, so a paired prediction counts toward its gold
/// partner's class and the pair's credit goes to the gold class; unpaired
/// predictions count toward their own class. This keeps every class total
/// within min(n_pred, n_gold).
class EvalCounts {
 public:
  void add_sentence(std::span<const EntitySpan> preds, std::span<const EntitySpan> golds) {
    EntityMatching m = match_entities(preds, golds);
    for (Scheme scheme : kSchemes) {
      const std::size_t s = ordinal(scheme);
      const bool tag_agnostic = scheme == Scheme::kExact || scheme == Scheme::kPartial;
      for (const EntitySpan& g : golds) ++per_class_[s][ordinal(g.tag)].n_gold;
      for (std::size_t p : m.unmatched_preds) ++per_class_[s][ordinal(preds[p].tag)].n_pred;
      for (const EntityPair& pair : m.pairs) {
        const EntitySpan& pred = preds[pair.pred];
        const EntitySpan& gold = golds[pair.gold];
        std::size_t pred_class = tag_agnostic ? ordinal(gold.tag) : ordinal(pred.tag);
        ++per_class_[s][pred_class].n_pred;
        per_class_[s][ordinal(gold.tag)].credit += pair_credit(pred, gold, scheme);
      }
    }
  }

  const CreditCounts& at(Scheme scheme, TagClass tag) const {
    return per_class_[ordinal(scheme)][ordinal(tag)];
  }

  CreditCounts micro(Scheme scheme) const {
    CreditCounts total;
    for (const CreditCounts& c : per_class_[ordinal(scheme)]) total += c;
    return total;
  }

 private:
  std::array<std::array<CreditCounts, kNumTags>, kNumSchemes> per_class_{};
};

struct SchemeScores {
  std::array<Prf, kNumTags> per_class;
  Prf micro;
  Prf macro;  // mean over classes present in gold or predictions
};

struct EvalReport {
  std::array<SchemeScores, kNumSchemes> schemes;

  const SchemeScores& operator[](Scheme s) const { return schemes[ordinal(s)]; }
};

inline EvalReport make_report(const EvalCounts& counts) {
  EvalReport report;
  for (Scheme scheme : kSchemes) {
    SchemeScores& out = report.schemes[ordinal(scheme)];
    std::size_t present = 0;
    for (TagClass t : kTagClasses) {
      const CreditCounts& c = counts.at(scheme, t);
      out.per_class[ordinal(t)] = to_prf(c);
      if (c.n_pred + c.n_gold > 0) {
        ++present;
        out.macro.precision += out.per_class[ordinal(t)].precision;
        out.macro.recall += out.per_class[ordinal(t)].recall;
        out.macro.f1 += out.per_class[ordinal(t)].f1;
      }
    }
    out.micro = to_prf(counts.micro(scheme));
    if (present == 0) {
      out.macro.precision = out.macro.recall = out.macro.f1 = 1.0;
    } else {
      out.macro.precision /= static_cast<double>(present);
      out.macro.recall /= static_cast<double>(present);
      out.macro.f1 /= static_cast<double>(present);
    }
    out.macro.n_pred = out.micro.n_pred;
    out.macro.n_gold = out.micro.n_gold;
    out.macro.credit = out.micro.credit;
  }
  return report;
}

/// Predicted and gold entities of one sentence.
struct SentenceEntities {
  std::vector<EntitySpan> preds;
  std::vector<EntitySpan> golds;
};

inline EvalReport score(std::span<const SentenceEntities> sentences) {
  EvalCounts counts;
  for (const SentenceEntities& s : sentences) counts.add_sentence(s.preds, s.golds);
  return make_report(counts);
}

/// Scores of one scheme over entities grouped by sentence.
inline SchemeScores score(std::span<const SentenceEntities> sentences, Scheme scheme) {
  return score(sentences)[scheme];
}

/// Scores a predicted corpus against a gold corpus with the same sentence ids
/// and token counts. Throws AlignmentError otherwise.
inline EvalReport full_report(const Corpus& pred, const Corpus& gold) {
  if (pred.sentences.size() != gold.sentences.size()) {
    throw AlignmentError("prediction corpus has " + std::to_string(pred.sentences.size()) +
                         " sentences, gold corpus has " +
                         std::to_string(gold.sentences.size()));
  }
  std::unordered_map<std::string_view, const AnnotatedSentence*> gold_by_id;
  for (const AnnotatedSentence& s : gold.sentences) gold_by_id.emplace(s.sentence_id, &s);
  EvalCounts counts;
  for (const AnnotatedSentence& p : pred.sentences) {
    auto it = gold_by_id.find(p.sentence_id);
    if (it == gold_by_id.end()) {
      throw AlignmentError("sentence '" + p.sentence_id + "' is missing from the gold corpus");
    }
    const AnnotatedSentence& g = *it->second;
    if (g.tokens.size() != p.tokens.size()) {
      throw AlignmentError("sentence '" + p.sentence_id + "' has " +
                           std::to_string(p.tokens.size()) + " predicted and " +
                           std::to_string(g.tokens.size()) + " gold tokens");
    }
    counts.add_sentence(bio_to_spans(p.tokens, p.labels).spans,
                        bio_to_spans(g.tokens, g.labels).spans);
  }
  return make_report(counts);
}

inline nlohmann::ordered_json to_json(const EvalReport& report) {
  auto prf_json = [](const Prf& p) {
    nlohmann::ordered_json j;
    j["p"] = p.precision;
    j["r"] = p.recall;
    j["f1"] = p.f1;
    j["n_pred"] = p.n_pred;
    j["n_gold"] = p.n_gold;
    return j;
  };
  nlohmann::ordered_json j;
  for (Scheme s : kSchemes) {
    nlohmann::ordered_json classes;
    for (TagClass t : kTagClasses) {
      classes[std::string(tag_name(t))] = prf_json(report[s].per_class[ordinal(t)]);
    }
    classes["micro"] = prf_json(report[s].micro);
    classes["macro"] = prf_json(report[s].macro);
    j[std::string(scheme_name(s))] = std::move(classes);
  }
  return j;
}

/// Four-scheme micro table followed by per-class F1.
inline std::string format_table(const EvalReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %9s %9s %9s\n", "", "precision", "recall", "f1");
  out += buf;
  for (Scheme s : kSchemes) {
    const Prf& m = report[s].micro;
    std::snprintf(buf, sizeof buf, "%-10s %9.4f %9.4f %9.4f\n",
                  std::string(scheme_name(s)).c_str(), m.precision, m.recall, m.f1);
    out += buf;
  }
  out += "\nper-class f1\n";
  std::snprintf(buf, sizeof buf, "%-10s", "");
  out += buf;
  for (TagClass t : kTagClasses) {
    std::snprintf(buf, sizeof buf, " %7s", std::string(tag_name(t)).c_str());
    out += buf;
  }
  out += "    macro\n";
  for (Scheme s : kSchemes) {
    std::snprintf(buf, sizeof buf, "%-10s", std::string(scheme_name(s)).c_str());
    out += buf;
    for (TagClass t : kTagClasses) {
      std::snprintf(buf, sizeof buf, " %7.4f", report[s].per_class[ordinal(t)].f1);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " %8.4f\n", report[s].macro.f1);
    out += buf;
  }
  return out;
}

}  // namespace piiforge
