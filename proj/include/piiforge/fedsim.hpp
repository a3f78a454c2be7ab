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

// Federated training simulator.
//
// Three scenarios share one training step (tagger.hpp's train_step):
//
//   central      the full corpus, shuffled once per epoch.
//   fed-central  workers keep their shards; each epoch every worker shuffles
//                its own sentences and the center pulls batches round-robin
//                (worker 0, 1, ..., K-1, 0, ...), skipping exhausted workers.
//   fed-remote   the model travels: each epoch it visits workers 0..K-1 and
//                trains on all of a worker's batches. Every transfer
//                (center -> worker, worker -> center) passes through
//                quantize_weights.
//
// Worker k shuffles with Rng(seed + k * kWorkerSeedStride), so worker 0 of a
// single-shard run draws exactly the central shuffle.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "piiforge/corpus.hpp"
#include "piiforge/nereval.hpp"
#include "piiforge/random.hpp"
#include "piiforge/tagger.hpp"

namespace piiforge {

enum class Scenario { kCentral, kFedCentral, kFedRemote };

inline constexpr std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kCentral: return "central";
    case Scenario::kFedCentral: return "fed-central";
    case Scenario::kFedRemote: return "fed-remote";
  }
  return "?";
}

inline std::optional<Scenario> parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::kCentral, Scenario::kFedCentral, Scenario::kFedRemote}) {
    if (scenario_name(s) == name) return s;
  }
  return std::nullopt;
}

/// Bit width of the transfer channel; 0 means no compression.
using CompressionBits = unsigned;
inline constexpr CompressionBits kNoCompression = 0;

inline std::string compression_name(CompressionBits bits) {
  return bits == kNoCompression ? "none" : std::to_string(bits);
}

inline std::optional<CompressionBits> parse_compression(std::string_view name) {
  if (name == "none") return kNoCompression;
  if (name == "16") return 16u;
  if (name == "8") return 8u;
  return std::nullopt;
}

struct FedRunConfig {
  Scenario scenario = Scenario::kCentral;
  std::size_t n_workers = 1;
  CompressionBits compression_bits = kNoCompression;
  TrainConfig train;
  std::uint32_t feature_dim = kDefaultFeatureDim;
  std::uint64_t hash_seed = kDefaultHashSeed;
  std::uint64_t seed = 13;  // shard assignment

  void validate() const {
    train.validate();
    if (n_workers < 1) throw ConfigError("n_workers must be at least 1");
    if (compression_bits != kNoCompression && compression_bits != 16 &&
        compression_bits != 8) {
      throw ConfigError("compression bits must be none, 16 or 8");
    }
    if (feature_dim == 0 || !std::has_single_bit(feature_dim)) {
      throw ConfigError("feature_dim must be a power of two");
    }
  }
};

struct WorkerShard {
  std::size_t worker_id = 0;
  Corpus corpus;
};

/// Random page-preserving partition into K shards. Pages are shuffled with
/// Rng(seed) and dealt round-robin, so shard sizes differ by at most one
/// page; each shard keeps its sentences in corpus order.
inline std::vector<WorkerShard> shard(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  std::vector<std::string> pages = page_order(corpus);
  if (k < 1) throw ShardError("shard count must be at least 1");
  if (k > pages.size()) {
    throw ShardError("cannot split " + std::to_string(pages.size()) + " pages into " +
                     std::to_string(k) + " shards");
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(pages));
  std::map<std::string, std::size_t> owner;
  for (std::size_t i = 0; i < pages.size(); ++i) owner[pages[i]] = i % k;
  std::vector<WorkerShard> shards(k);
  for (std::size_t w = 0; w < k; ++w) {
    shards[w].worker_id = w;
    shards[w].corpus.name = corpus.name + ".shard" + std::to_string(w);
  }
  for (const AnnotatedSentence& s : corpus.sentences) {
    shards[owner.at(s.page_id)].corpus.sentences.push_back(s);
  }
  return shards;
}

/// Per-tensor affine quantization of all weights to `bits` bits and back.
/// scale = (max - min) / (2^bits - 1); q = round((w - min) / scale), with
/// halves rounded away from zero; w' = min + q * scale.
inline TaggerModel quantize_weights(const TaggerModel& model, CompressionBits bits) {
  if (bits == kNoCompression || model.weights.empty()) return model;
  auto [lo_it, hi_it] = std::minmax_element(model.weights.begin(), model.weights.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return model;
  const double levels = std::ldexp(1.0, static_cast<int>(bits)) - 1.0;
  const double scale = (hi - lo) / levels;
  TaggerModel out = model;
  for (float& w : out.weights) {
    double q = std::clamp(std::round((static_cast<double>(w) - lo) / scale), 0.0, levels);
    w = static_cast<float>(lo + q * scale);
  }
  return out;
}

inline constexpr std::uint64_t kWorkerSeedStride = 0x9E3779B97F4A7C15ull;

inline std::uint64_t worker_seed(std::uint64_t seed, std::size_t worker_id) {
  return seed + static_cast<std::uint64_t>(worker_id) * kWorkerSeedStride;
}

/// One batch as it was realized during a run, indexed into the worker's
/// shard.
struct ScheduledBatch {
  std::size_t worker_id = 0;
  BatchIndices indices;

  bool operator==(const ScheduledBatch&) const = default;
};

struct FedRunResult {
  TaggerModel model;
  TrainLog log;
  EvalReport report;
  std::vector<ScheduledBatch> schedule;
  std::vector<std::size_t> visits;  // fed-remote worker visit order
};

namespace detail {

inline std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Each worker's batches for the coming epoch, after advancing its shuffle.
inline std::vector<std::vector<BatchIndices>> epoch_batches(
    std::vector<std::vector<std::size_t>>& orders, std::vector<Rng>& rngs,
    std::size_t batch_size) {
  std::vector<std::vector<BatchIndices>> out(orders.size());
  for (std::size_t w = 0; w < orders.size(); ++w) {
    rngs[w].shuffle(std::span<std::size_t>(orders[w]));
    out[w] = chunk_batches(orders[w], batch_size);
  }
  return out;
}

}  // namespace detail

/// Trains on pre-made shards under `config.scenario` and evaluates the
/// result on `test`. For central, the shards are concatenated in worker
/// order. config.n_workers is ignored in favor of shards.size().
inline FedRunResult run_on_shards(const FedRunConfig& config,
                                  std::span<const WorkerShard> shards, const Corpus& test) {
  config.validate();
  if (shards.empty()) throw ConfigError("no worker shards");
  std::size_t total = 0;
  for (const WorkerShard& s : shards) total += s.corpus.sentences.size();
  if (total == 0) throw DataError("cannot train on an empty corpus");

  FedRunResult result;
  result.model = TaggerModel::zeros(config.feature_dim, config.hash_seed);
  const TrainConfig& tc = config.train;

  if (config.scenario == Scenario::kCentral) {
    Corpus all;
    for (const WorkerShard& s : shards) {
      all.sentences.insert(all.sentences.end(), s.corpus.sentences.begin(),
                           s.corpus.sentences.end());
    }
    result.log = train(result.model, all, tc);
  } else {
    const std::size_t k = shards.size();
    std::vector<std::vector<Example>> examples(k);
    std::vector<std::vector<std::size_t>> orders(k);
    std::vector<Rng> rngs;
    for (std::size_t w = 0; w < k; ++w) {
      examples[w] = make_examples(result.model, shards[w].corpus, tc.max_sentence_tokens);
      orders[w] = detail::iota_indices(examples[w].size());
      rngs.emplace_back(worker_seed(tc.seed, w));
    }
    GradientBuffer grad(result.model.feature_dim);
    std::vector<const Example*> batch;
    auto step = [&](std::size_t w, const BatchIndices& indices) {
      batch.clear();
      for (std::size_t i : indices) batch.push_back(&examples[w][i]);
      result.log.record(train_step(result.model, batch, tc.learning_rate, grad), w);
      result.schedule.push_back(ScheduledBatch{w, indices});
    };

    for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
      auto batches = detail::epoch_batches(orders, rngs, tc.batch_size);
      if (config.scenario == Scenario::kFedCentral) {
        for (std::size_t round = 0;; ++round) {
          bool any = false;
          for (std::size_t w = 0; w < k; ++w) {
            if (round < batches[w].size()) {
              step(w, batches[w][round]);
              any = true;
            }
          }
          if (!any) break;
        }
      } else {
        for (std::size_t w = 0; w < k; ++w) {
          result.model = quantize_weights(result.model, config.compression_bits);
          result.visits.push_back(w);
          for (const BatchIndices& b : batches[w]) step(w, b);
          result.model = quantize_weights(result.model, config.compression_bits);
        }
      }
    }
  }

  result.report = full_report(predict_corpus(result.model, test), test);
  return result;
}

/// Shards `train_corpus` into config.n_workers shards (seeded by
/// config.seed) and runs the configured scenario. Central runs use the
/// corpus as given.
inline FedRunResult run(const FedRunConfig& config, const Corpus& train_corpus,
                        const Corpus& test) {
  config.validate();
  if (config.scenario == Scenario::kCentral) {
    WorkerShard all{0, train_corpus};
    return run_on_shards(config, std::span<const WorkerShard>(&all, 1), test);
  }
  std::vector<WorkerShard> shards = shard(train_corpus, config.n_workers, config.seed);
  return run_on_shards(config, shards, test);
}

// ---------------------------------------------------------------------------
// Worker sweep
// ---------------------------------------------------------------------------

struct SweepRow {
  std::size_t n_workers = 0;
  Scheme scheme = Scheme::kStrict;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  std::size_t repetitions = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  const SweepRow& at(std::size_t n_workers, Scheme scheme) const {
    for (const SweepRow& r : rows) {
      if (r.n_workers == n_workers && r.scheme == scheme) return r;
    }
    throw DataError("no sweep row for k=" + std::to_string(n_workers));
  }
};

struct SweepConfig {
  FedRunConfig base;
  std::size_t shards = 10;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t repetitions = 10;

  void validate() const {
    base.validate();
    if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
    if (k_min < 1 || k_min > k_max) throw ConfigError("invalid worker range");
    if (shards < k_max) throw ConfigError("shard count must be at least the largest k");
  }
};

/// For each repetition r the training corpus is split into `shards` shards
/// with seed base.seed + r, and for each k a fed-central run trains on the
/// first k shards with train seed base.train.seed + r. Reports the mean and
/// population standard deviation of micro F1 per scheme.
inline SweepResult sweep_workers(const SweepConfig& config, const Corpus& train_corpus,
                                 const Corpus& test) {
  config.validate();
  const std::size_t n_k = config.k_max - config.k_min + 1;
  // f1[k index][scheme][rep]
  std::vector<std::array<std::vector<double>, kNumSchemes>> f1(n_k);
  for (std::size_t r = 0; r < config.repetitions; ++r) {
    std::vector<WorkerShard> shards = shard(train_corpus, config.shards, config.base.seed + r);
    for (std::size_t k = config.k_min; k <= config.k_max; ++k) {
      FedRunConfig rc = config.base;
      rc.scenario = Scenario::kFedCentral;
      rc.n_workers = k;
      rc.train.seed = config.base.train.seed + r;
      FedRunResult res = run_on_shards(rc, std::span<const WorkerShard>(shards.data(), k), test);
      for (Scheme s : kSchemes) {
        f1[k - config.k_min][ordinal(s)].push_back(res.report[s].micro.f1);
      }
    }
  }
  SweepResult result;
  for (std::size_t k = config.k_min; k <= config.k_max; ++k) {
    for (Scheme s : kSchemes) {
      const std::vector<double>& v = f1[k - config.k_min][ordinal(s)];
      double mean = 0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0;
      for (double x : v) var += (x - mean) * (x - mean);
      var /= static_cast<double>(v.size());
      result.rows.push_back(SweepRow{k, s, mean, std::sqrt(var), v.size()});
    }
  }
  return result;
}

inline void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << "k,scheme,mean_f1,std_f1,reps\n";
  char buf[96];
  for (const SweepRow& r : sweep.rows) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", r.mean_f1, r.std_f1);
    out << r.n_workers << ',' << scheme_name(r.scheme) << ',' << buf << ',' << r.repetitions
        << '\n';
  }
}

}  // namespace piiforge
