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


// Random review decisions for replay tests.

#pragma once

#include <string>

#include "piiforge/review.hpp"
#include "test_support.hpp"

namespace piiforge::testing {

inline ReviewSpan random_review_span(Rng& rng, std::size_t n_tokens, bool allow_o) {
  std::size_t start = rng.below(n_tokens);
  std::size_t end = start + 1 + rng.below(std::min<std::size_t>(3, n_tokens - start));
  std::optional<TagClass> tag;
  if (!allow_o || !rng.coin(0.2)) tag = static_cast<TagClass>(rng.below(kNumTags));
  return ReviewSpan{start, end, tag};
}

/// A decision drawn from all four actions. It may be invalid against
/// `state` (unknown entity, overlap), which callers can use or filter.
inline ReviewDecision random_decision(Rng& rng, const ReviewState& state, std::size_t serial) {
  const ReviewSentence& s = state.sentences()[rng.below(state.sentences().size())];
  const std::size_t n = s.sentence.tokens.size();
  ReviewDecision d;
  d.decision_id = "d" + std::to_string(serial);
  d.sentence_id = s.sentence.sentence_id;
  d.annotator = rng.coin(0.5) ? "ann1" : "ann2";
  d.timestamp = 1700000000 + static_cast<std::int64_t>(serial);
  d.action = static_cast<ReviewAction>(rng.below(4));

  // Target: usually a live or original entity, sometimes an arbitrary span.
  if (!s.entities.empty() && rng.coin(0.85)) {
    const ReviewEntity& e = s.entities[rng.below(s.entities.size())];
    d.target = e.current && rng.coin(0.7) ? *e.current : e.original;
  } else {
    ReviewSpan t = random_review_span(rng, n, false);
    d.target = EntitySpan{t.start, t.end, *t.tag};
  }
  switch (d.action) {
    case ReviewAction::kConfirm:
      if (rng.coin(0.2)) d.target.reset();
      break;
    case ReviewAction::kReject:
      break;
    case ReviewAction::kCorrect:
      d.span = random_review_span(rng, n, true);
      if (rng.coin(0.4)) d.span->start = d.target->start, d.span->end = d.target->end;
      break;
    case ReviewAction::kAdd:
      d.target.reset();
      d.span = random_review_span(rng, n, false);
      break;
  }
  return d;
}

/// Draws decisions until one applies cleanly to `state`.
inline ReviewDecision random_valid_decision(Rng& rng, const ReviewState& state,
                                            std::size_t serial) {
  for (;;) {
    ReviewDecision d = random_decision(rng, state, serial);
    try {
      ReviewState trial = state;
      trial.apply(d);
      return d;
    } catch (const ReviewError&) {
    }
  }
}

}  // namespace piiforge::testing
