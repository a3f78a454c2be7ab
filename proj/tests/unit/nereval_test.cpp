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


#include <gtest/gtest.h>

#include <algorithm>

#include "piiforge/nereval.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace piiforge {
namespace {

constexpr TagClass kName = TagClass::PR;
constexpr TagClass kPlace = TagClass::ED;

std::array<double, 4> credits(const EntitySpan& pred, const EntitySpan& gold) {
  return {pair_credit(pred, gold, Scheme::kStrict), pair_credit(pred, gold, Scheme::kExact),
          pair_credit(pred, gold, Scheme::kType), pair_credit(pred, gold, Scheme::kPartial)};
}

TEST(PairCredit, RewardPattern) {
  const EntitySpan gold{0, 2, kName};
  EXPECT_EQ(credits({0, 2, kName}, gold), (std::array<double, 4>{1, 1, 1, 1}));
  EXPECT_EQ(credits({1, 2, kName}, gold), (std::array<double, 4>{0, 0, 0.5, 0.5}));
  EXPECT_EQ(credits({0, 2, kPlace}, gold), (std::array<double, 4>{0, 1, 0, 0.5}));
  EXPECT_EQ(credits({1, 2, kPlace}, gold), (std::array<double, 4>{0, 0, 0, 0.5}));
  EXPECT_EQ(credits({2, 4, kName}, gold), (std::array<double, 4>{0, 0, 0, 0}));
}

TEST(PairCredit, SchemeDominanceOverAllSmallPairs) {
  for (std::size_t ps = 0; ps < 5; ++ps)
    for (std::size_t pe = ps + 1; pe <= 5; ++pe)
      for (std::size_t gs = 0; gs < 5; ++gs)
        for (std::size_t ge = gs + 1; ge <= 5; ++ge)
          for (TagClass pt : kTagClasses)
            for (TagClass gt : {TagClass::BD, TagClass::SP}) {
              auto c = credits({ps, pe, pt}, {gs, ge, gt});
              ASSERT_LE(c[0], c[2]);
              ASSERT_LE(c[2], c[3]);
              ASSERT_LE(c[0], c[1]);
            }
}

TEST(Matching, SingleOverlapPaired) {
  std::vector<EntitySpan> p = {{1, 3, kName}}, g = {{2, 4, kName}};
  EntityMatching m = match_entities(p, g);
  EXPECT_EQ(m.pairs, (std::vector<EntityPair>{{0, 0}}));
  EXPECT_TRUE(m.unmatched_preds.empty());
  EXPECT_TRUE(m.unmatched_golds.empty());
}

TEST(Matching, EqualOverlapPrefersEarlierGold) {
  std::vector<EntitySpan> p = {{1, 3, kName}}, g = {{2, 4, kPlace}, {0, 2, kPlace}};
  EntityMatching m = match_entities(p, g);
  EXPECT_EQ(m.pairs, (std::vector<EntityPair>{{0, 1}}));
  EXPECT_EQ(m.unmatched_golds, (std::vector<std::size_t>{0}));
}

TEST(Matching, SameTagPreferredOnEqualOverlap) {
  std::vector<EntitySpan> p = {{0, 2, kPlace}, {0, 2, kName}}, g = {{1, 3, kName}};
  EntityMatching m = match_entities(p, g);
  EXPECT_EQ(m.pairs, (std::vector<EntityPair>{{1, 0}}));
}

TEST(Matching, DisjointNeverPaired) {
  std::vector<EntitySpan> p = {{0, 1, kName}}, g = {{1, 2, kName}};
  EntityMatching m = match_entities(p, g);
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.unmatched_preds.size(), 1u);
  EXPECT_EQ(m.unmatched_golds.size(), 1u);
}

using oracle::exhaustive_credit;
using oracle::greedy_credit;

std::vector<EntitySpan> any_spans(Rng& rng, std::size_t max_n, std::size_t length) {
  std::vector<EntitySpan> out;
  std::size_t n = rng.below(max_n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a = rng.below(length), b = rng.below(length);
    if (a > b) std::swap(a, b);
    out.push_back({a, b + 1, static_cast<TagClass>(rng.below(3))});
  }
  return out;
}

// With non-overlapping spans on each side, an identical-boundary pair always
// has the largest overlap in its row and column, so greedy pairing is optimal
// for strict and exact. Type and partial can fall short when a longer
// cross-tag overlap is taken first.
TEST(Matching, GreedyAgainstExhaustiveAssignment) {
  Rng rng(71);
  for (int round = 0; round < 3000; ++round) {
    auto p = testing::random_spans(rng, 8, 0.5);
    auto g = testing::random_spans(rng, 8, 0.5);
    if (p.size() > 4) p.resize(4);
    if (g.size() > 4) g.resize(4);
    for (Scheme s : kSchemes) {
      double greedy = greedy_credit(p, g, s);
      double best = exhaustive_credit(p, g, s);
      ASSERT_LE(greedy, best + 1e-12);
      if (s == Scheme::kStrict || s == Scheme::kExact) {
        ASSERT_EQ(greedy, best);
      }
      ASSERT_EQ(greedy_credit(p, g, s), greedy);
    }
  }
}

TEST(Matching, TypeShortfallExample) {
  // Greedy takes the 2-token cross-tag overlap and leaves the same-tag pair.
  std::vector<EntitySpan> p = {{0, 3, kName}};
  std::vector<EntitySpan> g = {{0, 2, kPlace}, {2, 3, kName}};
  EXPECT_EQ(greedy_credit(p, g, Scheme::kType), 0.0);
  EXPECT_EQ(exhaustive_credit(p, g, Scheme::kType), 0.5);
}

TEST(Matching, PairedSpansIndependentOfInputOrder) {
  Rng rng(72);
  for (int round = 0; round < 2000; ++round) {
    auto p = any_spans(rng, 4, 6), g = any_spans(rng, 4, 6);
    auto paired = [](const std::vector<EntitySpan>& p, const std::vector<EntitySpan>& g) {
      std::vector<std::pair<EntitySpan, EntitySpan>> out;
      for (const EntityPair& x : match_entities(p, g).pairs) out.emplace_back(p[x.pred], g[x.gold]);
      std::sort(out.begin(), out.end());
      return out;
    };
    auto base = paired(p, g);
    rng.shuffle(std::span<EntitySpan>(p));
    rng.shuffle(std::span<EntitySpan>(g));
    ASSERT_EQ(paired(p, g), base);
  }
}

TEST(Score, PartialMicroPrecisionExample) {
  std::vector<SentenceEntities> s = {
      {{{0, 2, kName}, {5, 6, kPlace}}, {{0, 2, kName}, {5, 6, TagClass::BD}}}};
  EXPECT_DOUBLE_EQ(score(s, Scheme::kPartial).micro.precision, 0.75);
}

TEST(Score, RewardRowsAsCorpus) {
  const EntitySpan gold{0, 2, kName};
  std::vector<SentenceEntities> s = {{{{0, 2, kName}}, {gold}},
                                     {{{1, 2, kName}}, {gold}},
                                     {{{0, 2, kPlace}}, {gold}},
                                     {{{1, 2, kPlace}}, {gold}}};
  EvalReport r = score(s);
  EXPECT_DOUBLE_EQ(r[Scheme::kPartial].micro.precision, 0.625);
  EXPECT_DOUBLE_EQ(r[Scheme::kStrict].micro.precision, 0.25);
  EXPECT_DOUBLE_EQ(r[Scheme::kExact].micro.precision, 0.5);
  EXPECT_DOUBLE_EQ(r[Scheme::kType].micro.precision, 0.375);
}

TEST(Score, EmptyConventions) {
  std::vector<SentenceEntities> none = {{{}, {}}};
  for (Scheme s : kSchemes) EXPECT_DOUBLE_EQ(score(none, s).micro.f1, 1.0);
  std::vector<SentenceEntities> missed = {{{}, {{0, 1, kName}}}};
  Prf m = score(missed, Scheme::kPartial).micro;
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
}

TEST(FullReport, SelfComparisonIsPerfect) {
  Rng rng(73);
  Corpus c = testing::random_corpus(rng, 10);
  EvalReport r = full_report(c, c);
  for (Scheme s : kSchemes) {
    EXPECT_DOUBLE_EQ(r[s].micro.f1, 1.0);
    EXPECT_DOUBLE_EQ(r[s].macro.f1, 1.0);
  }
}

TEST(FullReport, MisalignedCorporaRejected) {
  Rng rng(74);
  Corpus a = testing::random_corpus(rng, 3);
  Corpus b = a;
  b.sentences.pop_back();
  EXPECT_THROW(full_report(a, b), AlignmentError);
  b = a;
  b.sentences[0].sentence_id = "other";
  EXPECT_THROW(full_report(a, b), AlignmentError);
  b = a;
  b.sentences[0].tokens.push_back(Token{"x", 0, 1});
  b.sentences[0].labels.push_back(BioLabel::outside());
  EXPECT_THROW(full_report(a, b), AlignmentError);
}

TEST(FullReport, SchemeOrderingAndCreditAccounting) {
  Rng rng(75);
  for (int round = 0; round < 300; ++round) {
    Corpus gold = testing::random_corpus(rng, 1 + rng.below(5));
    Corpus pred = testing::perturb(rng, gold);
    EvalReport r = full_report(pred, gold);
    ASSERT_LE(r[Scheme::kStrict].micro.f1, r[Scheme::kType].micro.f1);
    ASSERT_LE(r[Scheme::kType].micro.f1, r[Scheme::kPartial].micro.f1);
    ASSERT_LE(r[Scheme::kStrict].micro.f1, r[Scheme::kExact].micro.f1);
    for (Scheme s : kSchemes) {
      double sum = 0;
      std::size_t n_pred = 0, n_gold = 0;
      for (const Prf& c : r[s].per_class) {
        sum += c.credit;
        n_pred += c.n_pred;
        n_gold += c.n_gold;
        ASSERT_LE(c.credit, static_cast<double>(std::min(c.n_pred, c.n_gold)) + 1e-12);
        ASSERT_GE(c.f1, 0.0);
        ASSERT_LE(c.f1, 1.0);
      }
      ASSERT_DOUBLE_EQ(sum, r[s].micro.credit);
      ASSERT_EQ(n_pred, r[s].micro.n_pred);
      ASSERT_EQ(n_gold, r[s].micro.n_gold);
    }
  }
}

TEST(FullReport, InvariantUnderSentenceReordering) {
  Rng rng(76);
  for (int round = 0; round < 100; ++round) {
    Corpus gold = testing::random_corpus(rng, 4);
    Corpus pred = testing::perturb(rng, gold);
    EvalReport a = full_report(pred, gold);
    rng.shuffle(std::span<AnnotatedSentence>(pred.sentences));
    EvalReport b = full_report(pred, gold);
    for (Scheme s : kSchemes) {
      ASSERT_DOUBLE_EQ(a[s].micro.f1, b[s].micro.f1);
      ASSERT_DOUBLE_EQ(a[s].macro.f1, b[s].macro.f1);
    }
  }
}

TEST(Score, InvariantUnderPredPermutation) {
  Rng rng(77);
  for (int round = 0; round < 1000; ++round) {
    SentenceEntities s{any_spans(rng, 5, 8), any_spans(rng, 4, 8)};
    EvalReport a = score(std::span<const SentenceEntities>(&s, 1));
    rng.shuffle(std::span<EntitySpan>(s.preds));
    EvalReport b = score(std::span<const SentenceEntities>(&s, 1));
    for (Scheme sc : kSchemes) ASSERT_DOUBLE_EQ(a[sc].micro.f1, b[sc].micro.f1);
  }
}

TEST(Report, JsonAndTableShape) {
  Rng rng(78);
  Corpus c = testing::random_corpus(rng, 3);
  EvalReport r = full_report(c, c);
  auto j = to_json(r);
  for (Scheme s : kSchemes) {
    ASSERT_TRUE(j.contains(std::string(scheme_name(s))));
    EXPECT_DOUBLE_EQ(j[std::string(scheme_name(s))]["micro"]["f1"].get<double>(), 1.0);
    EXPECT_TRUE(j[std::string(scheme_name(s))].contains("BD"));
  }
  std::string table = format_table(r);
  EXPECT_NE(table.find("partial"), std::string::npos);
  EXPECT_NE(table.find("1.0000"), std::string::npos);
}

}  // namespace
}  // namespace piiforge
