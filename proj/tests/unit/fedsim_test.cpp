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

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "piiforge/conll.hpp"
#include "piiforge/fedsim.hpp"
#include "test_support.hpp"

namespace piiforge {
namespace {

const std::string kData = PIIFORGE_TEST_DATA;

const Corpus& fixture() {
  static const Corpus c = read_conll(kData + "/fixture/gold.conll");
  return c;
}

FedRunConfig small_config(Scenario s, std::size_t k) {
  FedRunConfig c;
  c.scenario = s;
  c.n_workers = k;
  c.feature_dim = 1u << 14;
  c.train.batch_size = 8;
  return c;
}

std::set<std::string> page_set(const Corpus& c) {
  std::set<std::string> out;
  for (const AnnotatedSentence& s : c.sentences) out.insert(s.page_id);
  return out;
}

TEST(Shard, BalancedAndDeterministic) {
  Rng rng(91);
  Corpus c = testing::random_corpus(rng, 10);
  auto a = shard(c, 2, 5), b = shard(c, 2, 5);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(page_set(a[0].corpus).size(), 5u);
  EXPECT_EQ(page_set(a[1].corpus).size(), 5u);
  for (std::size_t w = 0; w < 2; ++w) {
    EXPECT_EQ(a[w].worker_id, w);
    EXPECT_EQ(a[w].corpus, b[w].corpus);
  }
}

TEST(Shard, ExactPartitionOnFuzzedCorpora) {
  Rng rng(92);
  for (int round = 0; round < 200; ++round) {
    Corpus c = testing::random_corpus(rng, 1 + rng.below(25));
    std::size_t pages = page_set(c).size();
    std::size_t k = 1 + rng.below(pages);
    auto shards = shard(c, k, rng.next());
    std::multiset<std::string> ids;
    std::set<std::string> all_pages;
    std::size_t min_pages = pages, max_pages = 0;
    for (const WorkerShard& s : shards) {
      std::set<std::string> p = page_set(s.corpus);
      min_pages = std::min(min_pages, p.size());
      max_pages = std::max(max_pages, p.size());
      for (const std::string& x : p) ASSERT_TRUE(all_pages.insert(x).second) << "page in two shards";
      for (const AnnotatedSentence& sent : s.corpus.sentences) ids.insert(sent.sentence_id);
    }
    ASSERT_LE(max_pages - min_pages, 1u);
    std::multiset<std::string> expected;
    for (const AnnotatedSentence& sent : c.sentences) expected.insert(sent.sentence_id);
    ASSERT_EQ(ids, expected);
    ASSERT_EQ(all_pages, page_set(c));
  }
}

TEST(Shard, TooManyShards) {
  Rng rng(93);
  Corpus c = testing::random_corpus(rng, 3);
  EXPECT_THROW(shard(c, 4, 1), ShardError);
  EXPECT_THROW(shard(c, 0, 1), ShardError);
}

TEST(Quantize, NoneIsIdentity) {
  Rng rng(94);
  TaggerModel m = TaggerModel::zeros(64);
  for (float& w : m.weights) w = static_cast<float>(rng.uniform() - 0.5);
  EXPECT_EQ(serialize_model(quantize_weights(m, kNoCompression)), serialize_model(m));
}

TEST(Quantize, HalfMapsToLevel128) {
  TaggerModel m = TaggerModel::zeros(1);
  std::fill(m.weights.begin(), m.weights.end(), 0.25f);
  m.weights[0] = 0.0f;
  m.weights[1] = 1.0f;
  m.weights[2] = 0.5f;
  TaggerModel q = quantize_weights(m, 8);
  EXPECT_EQ(q.weights[0], 0.0f);
  EXPECT_EQ(q.weights[1], 1.0f);
  EXPECT_EQ(q.weights[2], static_cast<float>(128.0 / 255.0));
  EXPECT_NEAR(q.weights[2], 0.50196, 1e-5);
}

TEST(Quantize, ConstantTensorUnchanged) {
  TaggerModel m = TaggerModel::zeros(16);
  std::fill(m.weights.begin(), m.weights.end(), 0.3f);
  EXPECT_EQ(quantize_weights(m, 8), m);
}

TEST(Quantize, ErrorBound) {
  Rng rng(95);
  for (int round = 0; round < 200; ++round) {
    TaggerModel m = TaggerModel::zeros(16);
    double spread = std::ldexp(1.0, static_cast<int>(rng.below(20)) - 10);
    for (float& w : m.weights) w = static_cast<float>((rng.uniform() - 0.3) * spread);
    for (CompressionBits bits : {8u, 16u}) {
      TaggerModel q = quantize_weights(m, bits);
      auto [lo, hi] = std::minmax_element(m.weights.begin(), m.weights.end());
      double scale = (static_cast<double>(*hi) - *lo) / (std::ldexp(1.0, static_cast<int>(bits)) - 1);
      for (std::size_t i = 0; i < m.weights.size(); ++i) {
        double err = std::abs(static_cast<double>(q.weights[i]) - m.weights[i]);
        // The result is stored as float, which adds at most half an ulp.
        double ulp = std::abs(std::nextafter(q.weights[i], INFINITY) - q.weights[i]);
        ASSERT_LE(err, scale / 2 + ulp) << bits;
      }
      // At most 2^bits distinct values.
      std::set<float> distinct(q.weights.begin(), q.weights.end());
      ASSERT_LE(distinct.size(), std::size_t{1} << bits);
    }
  }
}

TEST(Config, Validation) {
  FedRunConfig c;
  c.n_workers = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FedRunConfig{};
  c.compression_bits = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FedRunConfig{};
  c.feature_dim = 100;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_scenario("fed-remote"), Scenario::kFedRemote);
  EXPECT_FALSE(parse_scenario("remote"));
  EXPECT_EQ(parse_compression("8"), 8u);
  EXPECT_FALSE(parse_compression("4"));
}

TEST(Run, RemoteSingleWorkerEqualsCentral) {
  FedRunResult central = run(small_config(Scenario::kCentral, 1), fixture(), fixture());
  FedRunResult remote = run(small_config(Scenario::kFedRemote, 1), fixture(), fixture());
  EXPECT_EQ(serialize_model(remote.model), serialize_model(central.model));
  ASSERT_EQ(remote.log.entries.size(), central.log.entries.size());
  for (std::size_t i = 0; i < remote.log.entries.size(); ++i) {
    EXPECT_EQ(remote.log.entries[i].loss, central.log.entries[i].loss);
  }
}

// Trains centrally on the batch sequence a fed-central run realized, mapped
// back to positions in the full corpus through sentence ids.
TaggerModel replay_centrally(const FedRunConfig& config, const Corpus& corpus,
                             const std::vector<WorkerShard>& shards,
                             const std::vector<ScheduledBatch>& schedule) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    position[corpus.sentences[i].sentence_id] = i;
  }
  std::vector<BatchIndices> batches;
  for (const ScheduledBatch& b : schedule) {
    BatchIndices mapped;
    for (std::size_t i : b.indices) {
      mapped.push_back(position.at(shards[b.worker_id].corpus.sentences[i].sentence_id));
    }
    batches.push_back(mapped);
  }
  TaggerModel model = TaggerModel::zeros(config.feature_dim, config.hash_seed);
  std::vector<Example> examples = make_examples(model, corpus, config.train.max_sentence_tokens);
  TrainLog log;
  train_on_batches(model, examples, batches, config.train.learning_rate, log);
  return model;
}

TEST(Run, FedCentralEqualsCentralReplay) {
  for (std::size_t k : {2u, 5u}) {
    FedRunConfig config = small_config(Scenario::kFedCentral, k);
    config.train.epochs = 2;
    std::vector<WorkerShard> shards = shard(fixture(), k, config.seed);
    FedRunResult fed = run_on_shards(config, shards, fixture());
    TaggerModel replay = replay_centrally(config, fixture(), shards, fed.schedule);
    EXPECT_EQ(serialize_model(fed.model), serialize_model(replay)) << "k=" << k;
  }
}

TEST(Run, FedCentralInterleavesRoundRobin) {
  FedRunConfig config = small_config(Scenario::kFedCentral, 3);
  std::vector<WorkerShard> shards = shard(fixture(), 3, config.seed);
  FedRunResult fed = run_on_shards(config, shards, fixture());
  std::vector<std::size_t> expected;
  std::vector<std::size_t> n_batches;
  for (const WorkerShard& s : shards) {
    n_batches.push_back((s.corpus.sentences.size() + 7) / 8);
  }
  for (std::size_t round = 0; round < 100; ++round) {
    for (std::size_t w = 0; w < 3; ++w) {
      if (round < n_batches[w]) expected.push_back(w);
    }
  }
  std::vector<std::size_t> got;
  for (const ScheduledBatch& b : fed.schedule) got.push_back(b.worker_id);
  EXPECT_EQ(got, expected);
  for (std::size_t i = 0; i < fed.log.entries.size(); ++i) {
    EXPECT_EQ(fed.log.entries[i].worker_id, fed.schedule[i].worker_id);
  }
}

TEST(Run, RemoteEpochAccounting) {
  for (std::size_t k : {2u, 3u}) {
    FedRunConfig config = small_config(Scenario::kFedRemote, k);
    config.train.epochs = 3;
    config.compression_bits = 8;
    std::vector<WorkerShard> shards = shard(fixture(), k, config.seed);
    FedRunResult r = run_on_shards(config, shards, fixture());
    std::size_t per_epoch = 0;
    for (const WorkerShard& s : shards) per_epoch += (s.corpus.sentences.size() + 7) / 8;
    EXPECT_EQ(r.log.entries.size(), 3 * per_epoch);
    ASSERT_EQ(r.visits.size(), 3 * k);
    for (std::size_t i = 0; i < r.visits.size(); ++i) EXPECT_EQ(r.visits[i], i % k);
    // Batches of one visit come from the visited worker only.
    std::size_t pos = 0;
    for (std::size_t v : r.visits) {
      std::size_t n = (shards[v].corpus.sentences.size() + 7) / 8;
      for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(r.schedule[pos + j].worker_id, v);
      pos += n;
    }
  }
}

TEST(Run, RemoteCompressionQuantizesFinalModel) {
  FedRunConfig config = small_config(Scenario::kFedRemote, 2);
  config.compression_bits = 8;
  FedRunResult r = run(config, fixture(), fixture());
  std::set<float> distinct(r.model.weights.begin(), r.model.weights.end());
  EXPECT_LE(distinct.size(), 256u);
  FedRunResult none = run(small_config(Scenario::kFedRemote, 2), fixture(), fixture());
  EXPECT_NE(r.model, none.model);
}

TEST(Run, Deterministic) {
  for (Scenario s : {Scenario::kCentral, Scenario::kFedCentral, Scenario::kFedRemote}) {
    FedRunConfig c = small_config(s, 3);
    c.compression_bits = s == Scenario::kFedRemote ? 8 : 0;
    FedRunResult a = run(c, fixture(), fixture());
    FedRunResult b = run(c, fixture(), fixture());
    EXPECT_EQ(a.model, b.model) << scenario_name(s);
    EXPECT_EQ(a.log, b.log) << scenario_name(s);
  }
}

TEST(Run, ReportsAllSchemes) {
  FedRunResult r = run(small_config(Scenario::kCentral, 1), fixture(), fixture());
  for (Scheme s : kSchemes) {
    EXPECT_GE(r.report[s].micro.f1, 0.0);
    EXPECT_LE(r.report[s].micro.f1, 1.0);
  }
  EXPECT_LE(r.report[Scheme::kStrict].micro.f1, r.report[Scheme::kPartial].micro.f1);
}

TEST(Run, EmptyCorpusRejected) {
  EXPECT_THROW(run(small_config(Scenario::kCentral, 1), Corpus{}, fixture()), DataError);
}

TEST(Sweep, SingleRepetitionHasZeroStd) {
  SweepConfig sc;
  sc.base = small_config(Scenario::kFedCentral, 1);
  sc.shards = 4;
  sc.k_min = 2;
  sc.k_max = 4;
  sc.repetitions = 1;
  SweepResult r = sweep_workers(sc, fixture(), fixture());
  EXPECT_EQ(r.rows.size(), 3 * kNumSchemes);
  for (const SweepRow& row : r.rows) {
    EXPECT_EQ(row.std_f1, 0.0);
    EXPECT_EQ(row.repetitions, 1u);
  }
  std::ostringstream csv;
  write_sweep_csv(r, csv);
  EXPECT_EQ(csv.str().rfind("k,scheme,mean_f1,std_f1,reps\n", 0), 0u);
}

TEST(Sweep, AllShardsMeansFullCorpus) {
  // With k = S every repetition trains on every sentence of the corpus.
  const std::size_t S = 4;
  for (std::uint64_t r = 0; r < 3; ++r) {
    auto shards = shard(fixture(), S, 13 + r);
    std::size_t n = 0;
    for (const WorkerShard& s : shards) n += s.corpus.sentences.size();
    EXPECT_EQ(n, fixture().sentences.size());
  }
  SweepConfig sc;
  sc.base = small_config(Scenario::kFedCentral, 1);
  sc.shards = S;
  sc.k_min = S;
  sc.k_max = S;
  sc.repetitions = 2;
  SweepResult r = sweep_workers(sc, fixture(), fixture());
  // Hand-computed from the two runs it should consist of.
  std::vector<double> f1;
  for (std::uint64_t rep = 0; rep < 2; ++rep) {
    FedRunConfig c = sc.base;
    c.train.seed = sc.base.train.seed + rep;
    auto shards = shard(fixture(), S, sc.base.seed + rep);
    f1.push_back(run_on_shards(c, shards, fixture()).report[Scheme::kExact].micro.f1);
  }
  const SweepRow& row = r.at(S, Scheme::kExact);
  EXPECT_DOUBLE_EQ(row.mean_f1, (f1[0] + f1[1]) / 2);
  EXPECT_NEAR(row.std_f1, std::abs(f1[0] - f1[1]) / 2, 1e-12);
}

TEST(Sweep, InvalidRanges) {
  SweepConfig sc;
  sc.shards = 5;
  sc.k_max = 10;
  EXPECT_THROW(sc.validate(), ConfigError);
  sc = SweepConfig{};
  sc.k_min = 0;
  EXPECT_THROW(sc.validate(), ConfigError);
  sc = SweepConfig{};
  sc.repetitions = 0;
  EXPECT_THROW(sc.validate(), ConfigError);
}

}  // namespace
}  // namespace piiforge
