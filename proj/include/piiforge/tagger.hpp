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

// Per-token linear sequence tagger over hashed lexical features.
//
// Every token has kFeaturesPerToken hashed features; a label's score is the
// sum of its weights at those features, and the model is trained with
// minibatch softmax cross-entropy (averaged over the batch's tokens) and
// plain gradient descent. Training is single-threaded and fully determined by
// the model, the examples and the batch order.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "piiforge/corpus.hpp"
#include "piiforge/random.hpp"

namespace piiforge {

inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::uint32_t kDefaultFeatureDim = 1u << 18;
inline constexpr std::uint64_t kDefaultHashSeed = 0x9E3779B97F4A7C15ull;
inline constexpr std::size_t kFeaturesPerToken = 11;
inline constexpr std::string_view kModelMagic = "PIITAG";

struct TaggerModel {
  std::uint32_t version = kModelVersion;
  std::uint32_t feature_dim = 0;
  std::uint64_t hash_seed = kDefaultHashSeed;
  std::vector<float> weights;  // [feature_dim x kNumLabels], row-major

  static TaggerModel zeros(std::uint32_t feature_dim = kDefaultFeatureDim,
                           std::uint64_t hash_seed = kDefaultHashSeed) {
    if (feature_dim == 0 || !std::has_single_bit(feature_dim)) {
      throw ConfigError("feature_dim must be a power of two");
    }
    TaggerModel m;
    m.feature_dim = feature_dim;
    m.hash_seed = hash_seed;
    m.weights.assign(static_cast<std::size_t>(feature_dim) * kNumLabels, 0.0f);
    return m;
  }

  std::span<const float> row(std::uint32_t feature) const {
    return std::span<const float>(weights).subspan(
        static_cast<std::size_t>(feature) * kNumLabels, kNumLabels);
  }

  bool operator==(const TaggerModel&) const = default;
};

struct TrainConfig {
  double learning_rate = 5.0;
  std::size_t batch_size = 128;
  std::size_t max_sentence_tokens = 50;
  std::size_t epochs = 1;
  std::uint64_t seed = 13;

  void validate() const {
    if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning rate must be positive");
    }
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (max_sentence_tokens == 0) throw ConfigError("max sentence tokens must be positive");
    if (epochs == 0) throw ConfigError("epochs must be positive");
  }
};

struct TrainLogEntry {
  std::size_t step = 0;
  double loss = 0.0;
  std::size_t worker_id = 0;

  bool operator==(const TrainLogEntry&) const = default;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;

  void record(double loss, std::size_t worker_id) {
    entries.push_back(TrainLogEntry{entries.size() + 1, loss, worker_id});
  }
  double mean_loss() const {
    if (entries.empty()) return 0.0;
    double sum = 0;
    for (const auto& e : entries) sum += e.loss;
    return sum / static_cast<double>(entries.size());
  }

  bool operator==(const TrainLog&) const = default;
};

inline void write_loss_csv(const TrainLog& log, std::ostream& out) {
  out << "step,worker_id,loss\n";
  char buf[64];
  for (const TrainLogEntry& e : log.entries) {
    std::snprintf(buf, sizeof buf, "%.9g", e.loss);
    out << e.step << ',' << e.worker_id << ',' << buf << '\n';
  }
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::uint64_t fnv1a(std::string_view s,
                              std::uint64_t h = 0xcbf29ce484222325ull) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

// Upper -> X, lower -> x, digit -> 9, other bytes kept; runs collapsed.
inline std::string word_shape(std::string_view token) {
  std::string shape;
  for (char c : token) {
    char k = is_upper(c) ? 'X' : is_lower(c) ? 'x' : is_digit(c) ? '9' : c;
    if (shape.empty() || shape.back() != k) shape += k;
  }
  return shape;
}

}  // namespace detail

/// Hashed feature indices of the token at `position`: bias, lowercased word,
/// word shape, 2- and 3-byte prefixes and suffixes, and the lowercased
/// neighbors at offsets -2..+2 ("<s>" / "</s>" beyond the sentence).
inline std::array<std::uint32_t, kFeaturesPerToken> featurize(
    std::span<const Token> tokens, std::size_t position, std::uint32_t feature_dim,
    std::uint64_t hash_seed) {
  auto lower_at = [&](std::ptrdiff_t i) -> std::string {
    if (i < 0) return "<s>";
    if (static_cast<std::size_t>(i) >= tokens.size()) return "</s>";
    return detail::to_lower(tokens[static_cast<std::size_t>(i)].text);
  };
  const std::string& word = tokens[position].text;
  const std::string lower = detail::to_lower(word);
  auto prefix = [&](std::size_t n) { return lower.substr(0, std::min(n, lower.size())); };
  auto suffix = [&](std::size_t n) {
    return lower.substr(lower.size() - std::min(n, lower.size()));
  };
  const auto p = static_cast<std::ptrdiff_t>(position);
  const std::array<std::string, kFeaturesPerToken> names = {
      "b",
      "w=" + lower,
      "sh=" + detail::word_shape(word),
      "p2=" + prefix(2),
      "p3=" + prefix(3),
      "s2=" + suffix(2),
      "s3=" + suffix(3),
      "w-2=" + lower_at(p - 2),
      "w-1=" + lower_at(p - 1),
      "w+1=" + lower_at(p + 1),
      "w+2=" + lower_at(p + 2),
  };
  std::array<std::uint32_t, kFeaturesPerToken> out{};
  for (std::size_t k = 0; k < kFeaturesPerToken; ++k) {
    std::uint64_t h = detail::mix64(detail::fnv1a(names[k]) ^ hash_seed);
    out[k] = static_cast<std::uint32_t>(h & (feature_dim - 1));
  }
  return out;
}

inline std::array<std::uint32_t, kFeaturesPerToken> featurize(const TaggerModel& model,
                                                              std::span<const Token> tokens,
                                                              std::size_t position) {
  return featurize(tokens, position, model.feature_dim, model.hash_seed);
}

/// A featurized, truncated training sentence.
struct Example {
  std::vector<std::array<std::uint32_t, kFeaturesPerToken>> features;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
};

inline Example make_example(const TaggerModel& model, const AnnotatedSentence& sentence,
                            std::size_t max_tokens) {
  std::size_t n = std::min(sentence.tokens.size(), max_tokens);
  std::span<const Token> tokens(sentence.tokens.data(), n);
  Example ex;
  ex.features.reserve(n);
  ex.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ex.features.push_back(featurize(model, tokens, i));
    ex.labels.push_back(static_cast<std::uint8_t>(sentence.labels[i].index()));
  }
  return ex;
}

inline std::vector<Example> make_examples(const TaggerModel& model, const Corpus& corpus,
                                          std::size_t max_tokens) {
  std::vector<Example> out;
  out.reserve(corpus.sentences.size());
  for (const AnnotatedSentence& s : corpus.sentences) {
    out.push_back(make_example(model, s, max_tokens));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring, loss and gradient
// ---------------------------------------------------------------------------

using LabelScores = std::array<double, kNumLabels>;

inline LabelScores label_scores(const TaggerModel& model,
                                const std::array<std::uint32_t, kFeaturesPerToken>& features) {
  LabelScores s{};
  for (std::uint32_t f : features) {
    std::span<const float> w = model.row(f);
    for (std::size_t l = 0; l < kNumLabels; ++l) s[l] += static_cast<double>(w[l]);
  }
  return s;
}

/// Softmax of `scores` in place; returns log of the partition function.
inline double softmax_in_place(LabelScores& scores) {
  double max = *std::max_element(scores.begin(), scores.end());
  double sum = 0;
  for (double& v : scores) {
    v = std::exp(v - max);
    sum += v;
  }
  for (double& v : scores) v /= sum;
  return max + std::log(sum);
}

/// Highest-scoring label per token; ties go to the lower label index, so an
/// all-zero model predicts O everywhere.
inline std::vector<BioLabel> predict(const TaggerModel& model, std::span<const Token> tokens) {
  std::vector<BioLabel> labels;
  labels.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    LabelScores s = label_scores(model, featurize(model, tokens, i));
    std::size_t best = 0;
    for (std::size_t l = 1; l < kNumLabels; ++l) {
      if (s[l] > s[best]) best = l;
    }
    labels.push_back(BioLabel::from_index(best));
  }
  return labels;
}

/// Replaces every sentence's labels with the model's predictions.
inline Corpus predict_corpus(const TaggerModel& model, const Corpus& corpus) {
  Corpus out = corpus;
  out.name = corpus.name + ".pred";
  for (AnnotatedSentence& s : out.sentences) s.labels = predict(model, s.tokens);
  return out;
}

/// Mean cross-entropy over all tokens of the batch.
inline double batch_loss(const TaggerModel& model, std::span<const Example* const> batch) {
  double total = 0;
  std::size_t count = 0;
  for (const Example* ex : batch) {
    for (std::size_t i = 0; i < ex->size(); ++i) {
      LabelScores s = label_scores(model, ex->features[i]);
      double y_score = s[ex->labels[i]];
      total += softmax_in_place(s) - y_score;
      ++count;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

/// Dense accumulator for sparse gradients. Only touched rows are zeroed
/// between batches.
class GradientBuffer {
 public:
  explicit GradientBuffer(std::uint32_t feature_dim)
      : values_(static_cast<std::size_t>(feature_dim) * kNumLabels, 0.0),
        touched_flag_(feature_dim, 0) {}

  void add(std::uint32_t feature, const LabelScores& g) {
    if (!touched_flag_[feature]) {
      touched_flag_[feature] = 1;
      touched_.push_back(feature);
    }
    double* row = &values_[static_cast<std::size_t>(feature) * kNumLabels];
    for (std::size_t l = 0; l < kNumLabels; ++l) row[l] += g[l];
  }

  std::span<const std::uint32_t> touched() const { return touched_; }
  std::span<const double> row(std::uint32_t feature) const {
    return std::span<const double>(values_).subspan(
        static_cast<std::size_t>(feature) * kNumLabels, kNumLabels);
  }

  void clear() {
    for (std::uint32_t f : touched_) {
      std::fill_n(&values_[static_cast<std::size_t>(f) * kNumLabels], kNumLabels, 0.0);
      touched_flag_[f] = 0;
    }
    touched_.clear();
  }

  std::size_t feature_dim() const { return touched_flag_.size(); }

 private:
  std::vector<double> values_;
  std::vector<std::uint8_t> touched_flag_;
  std::vector<std::uint32_t> touched_;
};

/// Accumulates d(batch_loss)/d(weights) into `grad` (cleared first) and
/// returns the batch loss.
inline double accumulate_gradient(const TaggerModel& model,
                                  std::span<const Example* const> batch,
                                  GradientBuffer& grad) {
  grad.clear();
  std::size_t count = 0;
  for (const Example* ex : batch) count += ex->size();
  if (count == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(count);
  double total = 0;
  for (const Example* ex : batch) {
    for (std::size_t i = 0; i < ex->size(); ++i) {
      LabelScores p = label_scores(model, ex->features[i]);
      const std::size_t y = ex->labels[i];
      double y_score = p[y];
      total += softmax_in_place(p) - y_score;
      p[y] -= 1.0;
      for (double& v : p) v *= inv;
      for (std::uint32_t f : ex->features[i]) grad.add(f, p);
    }
  }
  return total * inv;
}

/// One gradient-descent step on `batch`; returns the loss before the update.
inline double train_step(TaggerModel& model, std::span<const Example* const> batch,
                         double learning_rate, GradientBuffer& grad) {
  double loss = accumulate_gradient(model, batch, grad);
  for (std::uint32_t f : grad.touched()) {
    std::span<const double> g = grad.row(f);
    float* w = &model.weights[static_cast<std::size_t>(f) * kNumLabels];
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      w[l] = static_cast<float>(static_cast<double>(w[l]) - learning_rate * g[l]);
    }
  }
  return loss;
}

/// A batch is a list of indices into an example vector.
using BatchIndices = std::vector<std::size_t>;

inline std::vector<BatchIndices> chunk_batches(std::span<const std::size_t> order,
                                               std::size_t batch_size) {
  std::vector<BatchIndices> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

/// Trains on batches in the given order, logging each batch's loss.
inline void train_on_batches(TaggerModel& model, std::span<const Example> examples,
                             std::span<const BatchIndices> batches, double learning_rate,
                             TrainLog& log, std::size_t worker_id = 0) {
  GradientBuffer grad(model.feature_dim);
  std::vector<const Example*> batch;
  for (const BatchIndices& indices : batches) {
    batch.clear();
    for (std::size_t i : indices) batch.push_back(&examples[i]);
    log.record(train_step(model, batch, learning_rate, grad), worker_id);
  }
}

/// Central training: sentences truncated to max_sentence_tokens, shuffled
/// once per epoch by an Rng seeded with config.seed, cut into batches.
inline TrainLog train(TaggerModel& model, const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  if (corpus.sentences.empty()) throw DataError("cannot train on an empty corpus");
  std::vector<Example> examples = make_examples(model, corpus, config.max_sentence_tokens);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);
  TrainLog log;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<BatchIndices> batches = chunk_batches(order, config.batch_size);
    train_on_batches(model, examples, batches, config.learning_rate, log);
  }
  return log;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view take(std::size_t n) {
    if (data_.size() - pos_ < n) throw ModelFormatError("model file is truncated");
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t uint(int bytes) {
    std::string_view b = take(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Model file layout (little-endian):
///   "PIITAG" | u32 version | u32 feature_dim | u64 hash_seed |
///   u32 label count | per label: u8 length, name bytes |
///   feature_dim * labels f32 weights, row-major
inline std::string serialize_model(const TaggerModel& model) {
  std::string out(kModelMagic);
  detail::put_u32(out, model.version);
  detail::put_u32(out, model.feature_dim);
  detail::put_u64(out, model.hash_seed);
  detail::put_u32(out, static_cast<std::uint32_t>(kNumLabels));
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    std::string_view name = BioLabel::from_index(l).name();
    out += static_cast<char>(name.size());
    out += name;
  }
  out.reserve(out.size() + model.weights.size() * 4);
  for (float w : model.weights) detail::put_u32(out, std::bit_cast<std::uint32_t>(w));
  return out;
}

inline TaggerModel deserialize_model(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (bytes.size() < kModelMagic.size() || in.take(kModelMagic.size()) != kModelMagic) {
    throw ModelFormatError("not a tagger model file");
  }
  TaggerModel model;
  model.version = static_cast<std::uint32_t>(in.uint(4));
  if (model.version != kModelVersion) {
    throw VersionMismatchError("model version " + std::to_string(model.version) +
                               ", expected " + std::to_string(kModelVersion));
  }
  model.feature_dim = static_cast<std::uint32_t>(in.uint(4));
  if (model.feature_dim == 0 || !std::has_single_bit(model.feature_dim)) {
    throw ModelFormatError("feature_dim is not a power of two");
  }
  model.hash_seed = in.uint(8);
  if (in.uint(4) != kNumLabels) throw ModelFormatError("unexpected label count");
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    std::size_t len = static_cast<std::size_t>(in.uint(1));
    if (in.take(len) != BioLabel::from_index(l).name()) {
      throw ModelFormatError("unexpected label list");
    }
  }
  const std::size_t count = static_cast<std::size_t>(model.feature_dim) * kNumLabels;
  if (in.remaining() != count * 4) {
    throw ModelFormatError(in.remaining() < count * 4 ? "model file is truncated"
                                                      : "trailing bytes after weights");
  }
  model.weights.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    model.weights[i] = std::bit_cast<float>(static_cast<std::uint32_t>(in.uint(4)));
  }
  return model;
}

inline void save_model(const TaggerModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write to '" + path + "' failed");
}

inline TaggerModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

/// 64-bit FNV-1a of the serialized model.
inline std::uint64_t model_fingerprint(const TaggerModel& model) {
  return detail::fnv1a(serialize_model(model));
}

}  // namespace piiforge
