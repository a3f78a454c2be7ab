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


// piiforge command-line tool.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "piiforge.hpp"

namespace fs = std::filesystem;
using namespace piiforge;

namespace {

constexpr std::uint64_t kDefaultSeed = 13;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw DataError("write to '" + path + "' failed");
}

// (page_id, path) of every .html/.htm file under `pages`, sorted by id. A
// single file is accepted too.
std::vector<std::pair<std::string, std::string>> list_pages(const std::string& pages) {
  std::vector<std::pair<std::string, std::string>> out;
  if (fs::is_regular_file(pages)) {
    out.emplace_back(fs::path(pages).stem().string(), pages);
    return out;
  }
  if (!fs::is_directory(pages)) throw DataError("no such page file or directory '" + pages + "'");
  for (const auto& entry : fs::directory_iterator(pages)) {
    std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".html" || ext == ".htm")) {
      out.emplace_back(entry.path().stem().string(), entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PiiRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_records(in);
}

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_file(path, j.dump(2) + "\n");
  }
}

// --- infobox ---------------------------------------------------------------

struct InfoboxArgs {
  std::string pages;
  std::string out;
  bool skip_missing = false;
};

int cmd_infobox(const InfoboxArgs& a) {
  std::vector<PiiRecord> records;
  std::size_t skipped = 0;
  for (const auto& [id, path] : list_pages(a.pages)) {
    try {
      records.push_back(normalize_keys(parse_infobox(read_file(path), id)));
    } catch (const NoInfoboxError& e) {
      if (!a.skip_missing) throw;
      std::cerr << "skipped: " << e.what() << '\n';
      ++skipped;
    }
  }
  std::ostringstream out;
  write_records(records, out);
  if (a.out.empty() || a.out == "-") {
    std::cout << out.str();
  } else {
    write_file(a.out, out.str());
  }
  std::cerr << "records: " << records.size() << ", pages without infobox: " << skipped << '\n';
  return 0;
}

// --- annotate --------------------------------------------------------------

struct AnnotateArgs {
  std::string pages;
  std::string records;
  std::string out;
  std::string stats;
  std::string candidates;
  double fuzzy_threshold = kDefaultFuzzyThreshold;
  bool keep_empty = false;
  unsigned threads = 1;
  std::string name = "annotated";
};

int cmd_annotate(const AnnotateArgs& a) {
  AnnotationConfig config;
  config.fuzzy_threshold = a.fuzzy_threshold;
  config.keep_empty_sentences = a.keep_empty;
  config.validate();

  std::map<std::string, PiiRecord> records;
  for (PiiRecord& r : load_records(a.records)) records.emplace(r.page_id, std::move(r));

  std::vector<PageInput> inputs;
  std::size_t without_record = 0;
  for (const auto& [id, path] : list_pages(a.pages)) {
    auto it = records.find(id);
    if (it == records.end()) {
      ++without_record;
      continue;
    }
    inputs.push_back(PageInput{extract_body_text(read_file(path)), it->second});
  }

  std::optional<SidecarCandidates> sidecar;
  CandidateProvider provider = heuristic_candidates();
  if (!a.candidates.empty()) {
    std::ifstream in(a.candidates);
    if (!in) throw DataError("cannot open '" + a.candidates + "'");
    sidecar = SidecarCandidates::read(in);
    provider = sidecar->provider();
  }

  std::vector<AnnotatedPage> pages = annotate_pages(inputs, config, provider, a.threads);
  Corpus corpus;
  corpus.name = a.name;
  AnnotationStats stats;
  for (AnnotatedPage& p : pages) {
    stats += p.stats;
    for (AnnotatedSentence& s : p.sentences) corpus.sentences.push_back(std::move(s));
  }
  write_conll(corpus, a.out);
  nlohmann::ordered_json j = to_json(stats);
  j["pages_without_record"] = without_record;
  write_json(j, a.stats);
  return 0;
}

// --- stats / split ---------------------------------------------------------

nlohmann::ordered_json stats_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json mentions;
  for (TagClass t : kTagClasses) mentions[std::string(tag_name(t))] = s.mentions[ordinal(t)];
  j["mentions"] = mentions;
  j["sentences"] = s.sentences;
  j["sentences_with_entities"] = s.sentences_with_entities;
  j["pages"] = s.pages;
  j["tokens"] = s.tokens;
  j["repairs"] = s.repairs;
  return j;
}

struct StatsArgs {
  std::string corpus;
  std::string out;
};

int cmd_stats(const StatsArgs& a) {
  write_json(stats_json(corpus_stats(read_conll(a.corpus))), a.out);
  return 0;
}

struct SplitArgs {
  std::string corpus;
  std::vector<double> ratios = {0.8, 0.1, 0.1};
  std::uint64_t seed = kDefaultSeed;
  std::string out_dir;
};

int cmd_split(const SplitArgs& a) {
  if (a.ratios.size() != 3) throw RatioError("--ratios needs exactly three values");
  CorpusSplit split = split_corpus(read_conll(a.corpus), {a.ratios[0], a.ratios[1], a.ratios[2]},
                                   a.seed);
  fs::create_directories(a.out_dir);
  write_conll(split.train, (fs::path(a.out_dir) / "train.conll").string());
  write_conll(split.validation, (fs::path(a.out_dir) / "validation.conll").string());
  write_conll(split.test, (fs::path(a.out_dir) / "test.conll").string());
  nlohmann::ordered_json j;
  j["train"] = stats_json(corpus_stats(split.train));
  j["validation"] = stats_json(corpus_stats(split.validation));
  j["test"] = stats_json(corpus_stats(split.test));
  write_json(j, "");
  return 0;
}

// --- train / predict / fedtrain / sweep -------------------------------------

struct TrainArgs {
  TrainConfig train;
  unsigned feature_bits = 18;
  std::uint64_t hash_seed = kDefaultHashSeed;
};

void add_train_options(CLI::App* cmd, TrainArgs& t) {
  cmd->add_option("--lr", t.train.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--batch-size", t.train.batch_size, "Sentences per batch")->capture_default_str();
  cmd->add_option("--max-tokens", t.train.max_sentence_tokens, "Truncate sentences to this length")
      ->capture_default_str();
  cmd->add_option("--epochs", t.train.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--feature-bits", t.feature_bits, "log2 of the hashed feature space")
      ->capture_default_str()
      ->check(CLI::Range(1u, 28u));
  cmd->add_option("--hash-seed", t.hash_seed, "Feature hashing seed")->capture_default_str();
}

struct CentralTrainArgs {
  std::string corpus;
  std::string model;
  std::string loss_csv;
  TrainArgs t;
};

void write_loss(const TrainLog& log, const std::string& path) {
  if (path.empty()) return;
  std::ostringstream out;
  write_loss_csv(log, out);
  write_file(path, out.str());
}

int cmd_train(const CentralTrainArgs& a) {
  TaggerModel model = TaggerModel::zeros(1u << a.t.feature_bits, a.t.hash_seed);
  TrainLog log = train(model, read_conll(a.corpus), a.t.train);
  save_model(model, a.model);
  write_loss(log, a.loss_csv);
  std::cerr << "steps: " << log.entries.size() << ", mean loss: " << log.mean_loss() << '\n';
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string corpus;
  std::string out;
};

int cmd_predict(const PredictArgs& a) {
  TaggerModel model = load_model(a.model);
  write_conll(predict_corpus(model, read_conll(a.corpus)), a.out);
  return 0;
}

struct FedArgs {
  std::string train_path;
  std::string test_path;
  std::string scenario = "central";
  std::size_t workers = 1;
  std::string compress = "none";
  std::string model;
  std::string loss_csv;
  std::string report;
  TrainArgs t;
};

int cmd_fedtrain(const FedArgs& a) {
  FedRunConfig config;
  auto scenario = parse_scenario(a.scenario);
  if (!scenario) throw ConfigError("unknown scenario '" + a.scenario + "'");
  auto bits = parse_compression(a.compress);
  if (!bits) throw ConfigError("unknown compression '" + a.compress + "'");
  config.scenario = *scenario;
  config.n_workers = a.workers;
  config.compression_bits = *bits;
  config.train = a.t.train;
  config.feature_dim = 1u << a.t.feature_bits;
  config.hash_seed = a.t.hash_seed;
  config.seed = a.t.train.seed;
  config.validate();
  FedRunResult result = run(config, read_conll(a.train_path), read_conll(a.test_path));
  if (!a.model.empty()) save_model(result.model, a.model);
  write_loss(result.log, a.loss_csv);
  std::cout << format_table(result.report);
  if (!a.report.empty()) write_json(to_json(result.report), a.report);
  return 0;
}

struct SweepArgs {
  std::string train_path;
  std::string test_path;
  std::size_t shards = 10;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t reps = 10;
  std::string out;
  TrainArgs t;
};

int cmd_sweep(const SweepArgs& a) {
  SweepConfig config;
  config.base.train = a.t.train;
  config.base.feature_dim = 1u << a.t.feature_bits;
  config.base.hash_seed = a.t.hash_seed;
  config.base.seed = a.t.train.seed;
  config.shards = a.shards;
  config.k_min = a.k_min;
  config.k_max = a.k_max;
  config.repetitions = a.reps;
  SweepResult result = sweep_workers(config, read_conll(a.train_path), read_conll(a.test_path));
  std::ostringstream out;
  write_sweep_csv(result, out);
  if (a.out.empty() || a.out == "-") {
    std::cout << out.str();
  } else {
    write_file(a.out, out.str());
  }
  return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::string pred;
  std::string gold;
  std::string json;
};

int cmd_evaluate(const EvaluateArgs& a) {
  EvalReport report = full_report(read_conll(a.pred), read_conll(a.gold));
  std::cout << format_table(report);
  if (!a.json.empty()) write_json(to_json(report), a.json);
  return 0;
}

// --- review ------------------------------------------------------------------

struct ReviewArgs {
  std::string corpus;
  std::string records;
  std::string log;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int cmd_review_serve(const ReviewArgs& a) {
  std::vector<PiiRecord> records = a.records.empty() ? std::vector<PiiRecord>{}
                                                     : load_records(a.records);
  ReviewService service(read_conll(a.corpus), records, a.log);
  httplib::Server server;
  install_routes(server, service);
  std::cerr << "review service on http://" << a.host << ':' << a.port << '\n';
  if (!server.listen(a.host, a.port)) {
    throw DataError("cannot listen on " + a.host + ":" + std::to_string(a.port));
  }
  return 0;
}

struct ExportArgs {
  std::string corpus;
  std::string log;
  std::string out;
  bool all = false;
};

int cmd_export_gold(const ExportArgs& a) {
  ReviewState state(read_conll(a.corpus));
  replay_log(a.log, state);
  write_conll(state.export_gold(!a.all), a.out);
  return 0;
}

// --- synth -------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  std::size_t pages = 20;
  std::size_t first = 0;
  std::uint64_t seed = 2026;
};

int cmd_synth(const SynthArgs& a) {
  std::vector<SynthPage> pages = synth_pages(a.seed, a.pages, a.first);
  fs::path dir(a.out_dir);
  fs::create_directories(dir / "pages");
  std::vector<PiiRecord> records;
  for (const SynthPage& p : pages) {
    write_file((dir / "pages" / (p.page_id + ".html")).string(), p.html);
    records.push_back(p.record);
  }
  std::ostringstream rec;
  write_records(records, rec);
  write_file((dir / "records.jsonl").string(), rec.str());
  write_conll(synth_gold_corpus(pages), (dir / "gold.conll").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automatic PII annotation, NER evaluation and federated tagger training"};
  app.set_config("--config", "", "Read options from an INI/TOML file; flags take precedence");
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Do not print the resolved configuration");

  auto seed_option = [](CLI::App* cmd, std::uint64_t& seed) {
    cmd->add_option("--seed", seed, "Random seed (default from PII_FORGE_SEED)")
        ->envname("PII_FORGE_SEED")
        ->capture_default_str();
  };

  InfoboxArgs infobox;
  auto* c_infobox = app.add_subcommand("infobox", "Extract PII records from saved HTML pages");
  c_infobox->add_option("--pages", infobox.pages, "Page file or directory of .html files")->required();
  c_infobox->add_option("--out", infobox.out, "Records JSONL output (default stdout)");
  c_infobox->add_flag("--skip-missing", infobox.skip_missing, "Skip pages without an infobox");

  AnnotateArgs annotate;
  auto* c_annotate = app.add_subcommand("annotate", "Annotate page text from PII records");
  c_annotate->add_option("--pages", annotate.pages, "Page file or directory of .html files")->required();
  c_annotate->add_option("--records", annotate.records, "Records JSONL")->required();
  c_annotate->add_option("--out", annotate.out, "CoNLL output")->required();
  c_annotate->add_option("--stats", annotate.stats, "Stats JSON output (default stdout)");
  c_annotate->add_option("--candidates", annotate.candidates, "Candidate sidecar JSONL");
  c_annotate->add_option("--fuzzy-threshold", annotate.fuzzy_threshold, "Fuzzy match threshold")
      ->capture_default_str();
  c_annotate->add_flag("--keep-empty", annotate.keep_empty, "Keep sentences without entities");
  c_annotate->add_option("--threads", annotate.threads, "Worker threads")->capture_default_str();
  c_annotate->add_option("--name", annotate.name, "Corpus name")->capture_default_str();

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Corpus statistics");
  c_stats->add_option("--corpus", stats.corpus, "CoNLL corpus")->required();
  c_stats->add_option("--out", stats.out, "JSON output (default stdout)");

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Page-level train/validation/test split");
  c_split->add_option("--corpus", split.corpus, "CoNLL corpus")->required();
  c_split->add_option("--ratios", split.ratios, "Three ratios summing to 1")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();
  c_split->add_option("--out-dir", split.out_dir, "Output directory")->required();
  seed_option(c_split, split.seed);

  CentralTrainArgs train_args;
  train_args.t.train.seed = kDefaultSeed;
  auto* c_train = app.add_subcommand("train", "Train the tagger centrally");
  c_train->add_option("--corpus", train_args.corpus, "Training CoNLL corpus")->required();
  c_train->add_option("--model", train_args.model, "Model output file")->required();
  c_train->add_option("--loss-csv", train_args.loss_csv, "Per-batch loss CSV");
  add_train_options(c_train, train_args.t);
  seed_option(c_train, train_args.t.train.seed);

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Tag a corpus with a trained model");
  c_predict->add_option("--model", predict.model, "Model file")->required();
  c_predict->add_option("--corpus", predict.corpus, "CoNLL corpus to tag")->required();
  c_predict->add_option("--out", predict.out, "CoNLL output")->required();

  FedArgs fed;
  fed.t.train.seed = kDefaultSeed;
  auto* c_fed = app.add_subcommand("fedtrain", "Train under a federated scenario and evaluate");
  c_fed->add_option("--train", fed.train_path, "Training CoNLL corpus")->required();
  c_fed->add_option("--test", fed.test_path, "Test CoNLL corpus")->required();
  c_fed->add_option("--scenario", fed.scenario, "central | fed-central | fed-remote")
      ->check(CLI::IsMember({"central", "fed-central", "fed-remote"}))
      ->capture_default_str();
  c_fed->add_option("--workers", fed.workers, "Number of workers")->capture_default_str();
  c_fed->add_option("--compress", fed.compress, "Transfer compression: none | 16 | 8")
      ->check(CLI::IsMember({"none", "16", "8"}))
      ->capture_default_str();
  c_fed->add_option("--model", fed.model, "Model output file");
  c_fed->add_option("--loss-csv", fed.loss_csv, "Per-batch loss CSV");
  c_fed->add_option("--report", fed.report, "Evaluation JSON output");
  add_train_options(c_fed, fed.t);
  seed_option(c_fed, fed.t.train.seed);

  SweepArgs sweep;
  sweep.t.train.seed = kDefaultSeed;
  auto* c_sweep = app.add_subcommand("sweep", "F1 against the number of fed-central workers");
  c_sweep->add_option("--train", sweep.train_path, "Training CoNLL corpus")->required();
  c_sweep->add_option("--test", sweep.test_path, "Test CoNLL corpus")->required();
  c_sweep->add_option("--shards", sweep.shards, "Shards per repetition")->capture_default_str();
  c_sweep->add_option("--k-min", sweep.k_min, "Smallest worker count")->capture_default_str();
  c_sweep->add_option("--k-max", sweep.k_max, "Largest worker count")->capture_default_str();
  c_sweep->add_option("--reps", sweep.reps, "Repetitions")->capture_default_str();
  c_sweep->add_option("--out", sweep.out, "CSV output (default stdout)");
  add_train_options(c_sweep, sweep.t);
  seed_option(c_sweep, sweep.t.train.seed);

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Score predictions against gold");
  c_eval->add_option("--pred", evaluate.pred, "Predicted CoNLL corpus")->required();
  c_eval->add_option("--gold", evaluate.gold, "Gold CoNLL corpus")->required();
  c_eval->add_option("--json", evaluate.json, "JSON report output");

  ReviewArgs review;
  auto* c_review = app.add_subcommand("review", "Human review of machine annotations");
  c_review->require_subcommand(1);
  auto* c_serve = c_review->add_subcommand("serve", "Serve the review HTTP API");
  c_serve->add_option("--corpus", review.corpus, "Machine-annotated CoNLL corpus")->required();
  c_serve->add_option("--records", review.records, "Records JSONL shown to reviewers");
  c_serve->add_option("--log", review.log, "Decision log (JSONL, appended)")->required();
  c_serve->add_option("--host", review.host, "Bind address")->capture_default_str();
  c_serve->add_option("--port", review.port, "Port")->capture_default_str();

  ExportArgs export_args;
  auto* c_export = app.add_subcommand("export-gold", "Replay a decision log into a gold corpus");
  c_export->add_option("--corpus", export_args.corpus, "Machine-annotated CoNLL corpus")->required();
  c_export->add_option("--log", export_args.log, "Decision log")->required();
  c_export->add_option("--out", export_args.out, "CoNLL output")->required();
  c_export->add_flag("--all", export_args.all, "Include sentences still pending");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate synthetic biography pages");
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  c_synth->add_option("--pages", synth.pages, "Number of pages")->capture_default_str();
  c_synth->add_option("--first", synth.first, "Index of the first page")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (!quiet) {
    std::string path;
    for (CLI::App* cmd = &app; !cmd->get_subcommands().empty();) {
      cmd = cmd->get_subcommands().front();
      path += (path.empty() ? "" : ".") + cmd->get_name();
      if (cmd->get_subcommands().empty()) {
        std::cerr << "# resolved configuration\n[" << path << "]\n" << cmd->config_to_str(true, false);
      }
    }
  }

  try {
    if (*c_infobox) return cmd_infobox(infobox);
    if (*c_annotate) return cmd_annotate(annotate);
    if (*c_stats) return cmd_stats(stats);
    if (*c_split) return cmd_split(split);
    if (*c_train) return cmd_train(train_args);
    if (*c_predict) return cmd_predict(predict);
    if (*c_fed) return cmd_fedtrain(fed);
    if (*c_sweep) return cmd_sweep(sweep);
    if (*c_eval) return cmd_evaluate(evaluate);
    if (*c_serve) return cmd_review_serve(review);
    if (*c_export) return cmd_export_gold(export_args);
    if (*c_synth) return cmd_synth(synth);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
