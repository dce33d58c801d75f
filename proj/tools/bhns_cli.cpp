// Command-line front end: ingest, sample, train, eval, bench.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bhns/corpus.hpp"
#include "bhns/embedding_store.hpp"
#include "bhns/metrics.hpp"
#include "bhns/sampler.hpp"
#include "bhns/scorer.hpp"
#include "bhns/synthbench.hpp"
#include "bhns/types.hpp"

namespace fs = std::filesystem;
using bhns::ValidationError;
using ordered_json = nlohmann::ordered_json;

namespace {

struct IngestArgs {
  std::string queries, products, annotations;
  std::string label_mode = "train";
  double augment_frac = 0.2;
  std::uint64_t seed = 0;
};

struct SampleArgs : IngestArgs {
  std::string sampler = "bhns";
  int k = 4;
  double tau = 2.0;
  double threshold = 0.5;
  int batch_size = 32;
  std::string out_dir;
};

struct TrainArgs {
  std::string batches_dir, queries, products, out;
  double lr = 0.5;
  int epochs = 400;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct EvalArgs {
  std::string checkpoint, queries, products, annotations, out;
  std::string label_mode = "eval";
  double augment_frac = 0.2;
  double positive_threshold = 1.0 - 1e-9;
  std::vector<int> ndcg_cutoffs{5, 10, 20};
  std::uint64_t seed = 0;
};

struct BenchArgs {
  int clusters = 4, queries_per_cluster = 4, products_per_cluster = 8, dim = 16;
  double intra = 0.9, inter = 0.2, label_noise = 0.0;
  std::vector<std::string> samplers{"vns", "hns", "bhns"};
  int k = 4;
  double tau = 2.0;
  double threshold = 0.5;
  int batch_size = 16;
  int n_seeds = 20;
  // Convergence-regime training; see BenchHyper.
  double lr = 5.0;
  int epochs = 200000;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  std::string out, csv, dump_theta;
};

bhns::LabelMode parse_label_mode(const std::string& name) {
  if (name == "train") return bhns::LabelMode::kTrain;
  if (name == "eval") return bhns::LabelMode::kEval;
  throw ValidationError("label mode must be 'train' or 'eval'");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write output file: " + path);
  out << content;
}

void emit(const ordered_json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

bhns::Corpus load_corpus(const IngestArgs& args, const bhns::EmbeddingStore& store) {
  bhns::Corpus corpus =
      bhns::Corpus::load(args.annotations, store, parse_label_mode(args.label_mode));
  if (args.augment_frac > 0.0) {
    corpus = bhns::augment_random_pairs(corpus, store, args.augment_frac, args.seed);
  }
  return corpus;
}

int cmd_ingest(const IngestArgs& args) {
  const auto store = bhns::EmbeddingStore::load(args.queries, args.products);
  const auto corpus = load_corpus(args, store);

  std::size_t n_augmented = 0;
  std::map<std::string, std::size_t> histogram;
  for (const auto& pair : corpus.pairs()) {
    if (pair.provenance == bhns::Provenance::kRandomAugmented) ++n_augmented;
    histogram[ordered_json(pair.label).dump()] += 1;
  }

  ordered_json doc;
  doc["n_queries"] = store.n_queries();
  doc["n_products"] = store.n_products();
  doc["dim"] = store.dim();
  doc["n_pairs"] = corpus.size();
  doc["n_annotated"] = corpus.size() - n_augmented;
  doc["n_augmented"] = n_augmented;
  doc["label_histogram"] = histogram;
  doc["run_config"] = {{"command", "ingest"},
                       {"queries", args.queries},
                       {"products", args.products},
                       {"annotations", args.annotations},
                       {"label_mode", args.label_mode},
                       {"augment_frac", args.augment_frac},
                       {"seed", args.seed}};
  emit(doc, "");
  return 0;
}

std::string batch_file_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "batch_%04zu.jsonl", index);
  return name;
}

int cmd_sample(const SampleArgs& args) {
  const auto store = bhns::EmbeddingStore::load(args.queries, args.products);
  const auto corpus = load_corpus(args, store);

  bhns::SamplerConfig cfg;
  cfg.kind = bhns::sampler_kind_from_string(args.sampler);
  cfg.k = args.k;
  cfg.tau = args.tau;
  cfg.seed = args.seed;
  cfg.positivity_threshold = args.threshold;
  cfg.validate();

  const auto batches = bhns::build_batches(corpus, store, cfg, args.batch_size);

  fs::create_directories(args.out_dir);
  ordered_json manifest;
  manifest["run_config"] = {{"command", "sample"},
                            {"queries", args.queries},
                            {"products", args.products},
                            {"annotations", args.annotations},
                            {"label_mode", args.label_mode},
                            {"augment_frac", args.augment_frac},
                            {"sampler", args.sampler},
                            {"k", args.k},
                            {"tau", args.tau},
                            {"positivity_threshold", args.threshold},
                            {"batch_size", args.batch_size},
                            {"seed", args.seed}};
  manifest["n_batches"] = batches.size();
  auto& files = manifest["batches"] = ordered_json::array();
  auto& warnings = manifest["warnings"] = ordered_json::array();

  for (const auto& batch : batches) {
    const std::string name = batch_file_name(static_cast<std::size_t>(batch.index));
    std::ofstream out(fs::path(args.out_dir) / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write batch file in " + args.out_dir);
    bhns::write_batch_jsonl(batch, out);
    files.push_back(name);
    for (const auto& w : batch.warnings) warnings.push_back(w);
  }
  write_text_file((fs::path(args.out_dir) / "manifest.json").string(),
                  manifest.dump(2) + "\n");
  std::cout << "wrote " << batches.size() << " batch files to " << args.out_dir << "\n";
  return 0;
}

int cmd_train(const TrainArgs& args) {
  const auto store = bhns::EmbeddingStore::load(args.queries, args.products);

  const fs::path manifest_path = fs::path(args.batches_dir) / "manifest.json";
  std::ifstream manifest_in(manifest_path);
  if (!manifest_in) throw ValidationError("cannot open batch manifest: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(manifest_path.string() + ": " + e.what());
  }

  std::vector<bhns::BatchRow> rows;
  for (const auto& file : manifest.at("batches")) {
    const auto batch_rows =
        bhns::read_batch_jsonl((fs::path(args.batches_dir) / file.get<std::string>()).string());
    rows.insert(rows.end(), batch_rows.begin(), batch_rows.end());
  }

  bhns::TrainHyper hyper{args.lr, args.epochs, args.seed, args.l2};
  const auto training_rows = bhns::rows_from_batch_rows(rows, store);
  const auto [params, report] = bhns::train(training_rows, hyper);

  ordered_json doc;
  doc["d"] = (params.w.size() - 1) / 2;
  doc["w"] = std::vector<double>(params.w.data(), params.w.data() + params.w.size());
  doc["b"] = params.b;
  doc["feature_map"] = bhns::kFeatureMapId;
  doc["report"] = {{"epochs", report.epochs},
                   {"final_loss", report.final_loss},
                   {"loss_curve", report.loss_curve},
                   {"seed", report.seed}};
  doc["run_config"] = {{"command", "train"},
                       {"batches", args.batches_dir},
                       {"queries", args.queries},
                       {"products", args.products},
                       {"lr", args.lr},
                       {"epochs", args.epochs},
                       {"l2", args.l2},
                       {"seed", args.seed}};
  emit(doc, args.out);
  std::cerr << "final loss " << report.final_loss << " after " << report.epochs << " epochs\n";
  return 0;
}

ordered_json metrics_to_json(const bhns::MetricsReport& report) {
  ordered_json doc;
  doc["auroc"] = report.auroc ? ordered_json(*report.auroc) : ordered_json(nullptr);
  doc["pearson"] = report.pearson ? ordered_json(*report.pearson) : ordered_json(nullptr);
  doc["spearman"] = report.spearman ? ordered_json(*report.spearman) : ordered_json(nullptr);
  doc["mrr"] = report.mrr;
  auto& ndcg = doc["ndcg"] = ordered_json::object();
  for (const auto& [cutoff, value] : report.ndcg) ndcg[std::to_string(cutoff)] = value;
  doc["n_queries"] = report.n_queries;
  doc["n_pairs"] = report.n_pairs;
  if (!report.errors.empty()) doc["errors"] = report.errors;
  return doc;
}

int cmd_eval(const EvalArgs& args) {
  const auto store = bhns::EmbeddingStore::load(args.queries, args.products);
  IngestArgs corpus_args;
  corpus_args.queries = args.queries;
  corpus_args.products = args.products;
  corpus_args.annotations = args.annotations;
  corpus_args.label_mode = args.label_mode;
  corpus_args.augment_frac = args.augment_frac;
  corpus_args.seed = args.seed;
  const auto corpus = load_corpus(corpus_args, store);
  const auto params = bhns::load_checkpoint(args.checkpoint);

  std::vector<bhns::EvalPair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& pair : corpus.pairs()) {
    const double predicted = bhns::score(params, store.query_vec(store.query_row(pair.query_id)),
                                         store.product_vec(store.product_row(pair.product_id)));
    pairs.push_back(bhns::EvalPair{pair.query_id, pair.product_id, predicted, pair.label});
  }

  bhns::MetricsOptions options;
  options.ndcg_cutoffs = args.ndcg_cutoffs;
  options.positive_threshold = args.positive_threshold;
  const auto report = bhns::evaluate(pairs, options);

  ordered_json doc = metrics_to_json(report);
  doc["run_config"] = {{"command", "eval"},
                       {"checkpoint", args.checkpoint},
                       {"queries", args.queries},
                       {"products", args.products},
                       {"annotations", args.annotations},
                       {"label_mode", args.label_mode},
                       {"augment_frac", args.augment_frac},
                       {"positive_threshold", args.positive_threshold},
                       {"ndcg_cutoffs", args.ndcg_cutoffs},
                       {"seed", args.seed}};
  emit(doc, args.out);

  if (!report.errors.empty()) {
    for (const auto& [metric, message] : report.errors) {
      std::cerr << metric << ": " << message << "\n";
    }
    return 1;
  }
  return 0;
}

int cmd_bench(const BenchArgs& args) {
  bhns::SynthSpec spec;
  spec.n_clusters = args.clusters;
  spec.queries_per_cluster = args.queries_per_cluster;
  spec.products_per_cluster = args.products_per_cluster;
  spec.dim = args.dim;
  spec.intra_cluster_cos = args.intra;
  spec.inter_cluster_cos_max = args.inter;
  spec.label_noise = args.label_noise;
  spec.seed = args.seed;
  spec.validate();

  std::vector<bhns::SamplerConfig> cfgs;
  for (const auto& name : args.samplers) {
    bhns::SamplerConfig cfg;
    cfg.kind = bhns::sampler_kind_from_string(name);
    cfg.k = args.k;
    cfg.tau = args.tau;
    cfg.seed = args.seed;
    cfg.positivity_threshold = args.threshold;
    cfg.validate();
    cfgs.push_back(cfg);
  }

  bhns::BenchHyper hyper;
  hyper.trainer = bhns::TrainHyper{args.lr, args.epochs, args.seed, args.l2};
  hyper.batch_size = args.batch_size;

  const auto report = bhns::run_bench(spec, cfgs, hyper, args.n_seeds);

  ordered_json doc;
  doc["spec"] = {{"n_clusters", spec.n_clusters},
                 {"queries_per_cluster", spec.queries_per_cluster},
                 {"products_per_cluster", spec.products_per_cluster},
                 {"dim", spec.dim},
                 {"intra_cluster_cos", spec.intra_cluster_cos},
                 {"inter_cluster_cos_max", spec.inter_cluster_cos_max},
                 {"label_noise", spec.label_noise},
                 {"seed", spec.seed}};
  doc["seeds"] = report.seeds;
  auto& samplers = doc["samplers"] = ordered_json::array();
  for (const auto& result : report.samplers) {
    ordered_json entry;
    entry["sampler"] = std::string(bhns::to_string(result.config.kind));
    entry["k"] = result.config.k;
    entry["tau"] = result.config.tau;
    entry["false_negative_selection_rate"] = result.false_negative_selection_rate;
    entry["mean_pseudo_label_on_planted_fn"] =
        result.mean_pseudo_label_on_planted_fn
            ? ordered_json(*result.mean_pseudo_label_on_planted_fn)
            : ordered_json(nullptr);
    entry["auroc_after_training"] = result.auroc_after_training;
    entry["rate_per_seed"] = result.rate_per_seed;
    entry["auroc_per_seed"] = result.auroc_per_seed;
    samplers.push_back(std::move(entry));
  }
  doc["run_config"] = {{"command", "bench"},
                       {"samplers", args.samplers},
                       {"k", args.k},
                       {"tau", args.tau},
                       {"positivity_threshold", args.threshold},
                       {"batch_size", args.batch_size},
                       {"n_seeds", args.n_seeds},
                       {"lr", args.lr},
                       {"epochs", args.epochs},
                       {"l2", args.l2},
                       {"seed", args.seed}};
  emit(doc, args.out);

  // Optional inspection dumps, produced for the first seed only.
  if (!args.csv.empty() || !args.dump_theta.empty()) {
    const auto bench = bhns::generate(spec);

    if (!args.csv.empty()) {
      std::string csv = "query_id,product_id,sampler,selected,theta,is_planted_fn\n";
      for (const auto& cfg : cfgs) {
        const auto traces = bhns::trace_candidates(bench.corpus, bench.store, cfg, args.batch_size);
        for (const auto& t : traces) {
          const bool planted =
              bench.planted_false_negatives.count({t.query_id, t.product_id}) > 0;
          csv += t.query_id + "," + t.product_id + "," +
                 std::string(bhns::to_string(cfg.kind)) + "," + (t.selected ? "1" : "0") + "," +
                 ordered_json(t.theta).dump() + "," + (planted ? "1" : "0") + "\n";
        }
      }
      write_text_file(args.csv, csv);
    }

    if (!args.dump_theta.empty()) {
      std::string jsonl;
      const auto traces = bhns::trace_candidates(bench.corpus, bench.store, cfgs.front(),
                                                 args.batch_size);
      for (const auto& t : traces) {
        ordered_json row;
        row["batch"] = t.batch_index;
        row["query_id"] = t.query_id;
        row["product_id"] = t.product_id;
        row["theta"] = t.theta;
        row["anchor_count"] = t.anchor_count;
        jsonl += row.dump() + "\n";
      }
      write_text_file(args.dump_theta, jsonl);
    }
  }
  return 0;
}

void add_seed_option(CLI::App* cmd, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "global seed (env BHNS_SEED)")
      ->envname("BHNS_SEED")
      ->capture_default_str();
}

std::string trim_view(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Rewrites the argument list so that `--config FILE` behaves as a layer of
// defaults: each `key=value` line of the file is appended as `--key=value`
// unless that flag already appears on the command line. Explicit flags
// therefore always win; '#' starts a comment.
std::vector<std::string> expand_config_args(const std::vector<std::string>& args) {
  std::string config_path;
  std::vector<std::string> out;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw ValidationError("--config requires a file path");
      config_path = args[++i];
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
      continue;
    }
    if (a.size() > 2 && a.rfind("--", 0) == 0) {
      const auto eq = a.find('=');
      given.insert(a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2));
    }
    out.push_back(a);
  }
  if (config_path.empty()) return out;

  std::ifstream in(config_path);
  if (!in) throw ValidationError("cannot open config file: " + config_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim_view(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError(config_path + ":" + std::to_string(line_no) +
                            ": expected key=value");
    }
    const std::string key = trim_view(stripped.substr(0, eq));
    const std::string value = trim_view(stripped.substr(eq + 1));
    if (key == "config") {
      throw ValidationError(config_path + ":" + std::to_string(line_no) +
                            ": config files cannot include other config files");
    }
    if (!given.insert(key).second) continue;  // flag given or earlier line wins
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"negative-sampling engine and evaluation harness"};
  app.require_subcommand(1);
  app.footer("Every subcommand also accepts --config FILE, a flat key=value file whose\n"
             "entries act as defaults; flags given on the command line override it.");

  IngestArgs ingest_args;
  SampleArgs sample_args;
  TrainArgs train_args;
  EvalArgs eval_args;
  BenchArgs bench_args;
  int rc = 0;

  auto add_corpus_options = [](CLI::App* cmd, IngestArgs& args) {
    cmd->add_option("--queries", args.queries, "query embedding file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--products", args.products, "product embedding file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--annotations", args.annotations, "annotation JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--label-mode", args.label_mode, "category mapping: train or eval")
        ->check(CLI::IsMember({"train", "eval"}))
        ->capture_default_str();
    cmd->add_option("--augment-frac", args.augment_frac,
                    "fraction of random zero-label pairs to append")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "validate inputs and print a corpus summary");
  add_corpus_options(ingest, ingest_args);
  add_seed_option(ingest, ingest_args.seed);
  ingest->callback([&]() { rc = cmd_ingest(ingest_args); });

  auto* sample = app.add_subcommand("sample", "write sampled training batches as JSONL");
  add_corpus_options(sample, static_cast<IngestArgs&>(sample_args));
  sample->add_option("--sampler", sample_args.sampler, "vns, hns, or bhns")
      ->check(CLI::IsMember({"vns", "hns", "bhns"}))
      ->capture_default_str();
  sample->add_option("--k", sample_args.k, "negatives per query")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  sample->add_option("--tau", sample_args.tau, "regularization temperature")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sample->add_option("--threshold", sample_args.threshold, "positivity threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sample->add_option("--batch-size", sample_args.batch_size, "pairs per batch")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  sample->add_option("--out", sample_args.out_dir, "output directory")->required();
  add_seed_option(sample, sample_args.seed);
  sample->callback([&]() { rc = cmd_sample(sample_args); });

  auto* train = app.add_subcommand("train", "fit the relevance scorer on sampled batches");
  train->add_option("--batches", train_args.batches_dir, "directory written by `sample`")
      ->required()
      ->check(CLI::ExistingDirectory);
  train->add_option("--queries", train_args.queries, "query embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--products", train_args.products, "product embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--lr", train_args.lr, "learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--epochs", train_args.epochs, "training epochs")
      ->check(CLI::Range(1, 1 << 24))
      ->capture_default_str();
  train->add_option("--l2", train_args.l2, "l2 penalty on weights")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--out", train_args.out, "checkpoint path (stdout if omitted)");
  add_seed_option(train, train_args.seed);
  train->callback([&]() { rc = cmd_train(train_args); });

  auto* eval = app.add_subcommand("eval", "score annotated pairs and report metrics");
  eval->add_option("--checkpoint", eval_args.checkpoint, "trained checkpoint JSON")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--queries", eval_args.queries, "query embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--products", eval_args.products, "product embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--annotations", eval_args.annotations, "annotation JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--label-mode", eval_args.label_mode, "category mapping: train or eval")
      ->check(CLI::IsMember({"train", "eval"}))
      ->capture_default_str();
  eval->add_option("--augment-frac", eval_args.augment_frac,
                   "fraction of random zero-label pairs to append")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  eval->add_option("--positive-threshold", eval_args.positive_threshold,
                   "binary positive iff label >= this")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--ndcg-cutoffs", eval_args.ndcg_cutoffs, "NDCG cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  eval->add_option("--out", eval_args.out, "metrics JSON path (stdout if omitted)");
  add_seed_option(eval, eval_args.seed);
  eval->callback([&]() { rc = cmd_eval(eval_args); });

  auto* bench = app.add_subcommand("bench",
                                   "compare samplers on a synthetic planted-cluster corpus");
  bench->add_option("--clusters", bench_args.clusters)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--queries-per-cluster", bench_args.queries_per_cluster)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--products-per-cluster", bench_args.products_per_cluster)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--dim", bench_args.dim)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--intra", bench_args.intra, "min intra-cluster cosine")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench->add_option("--inter", bench_args.inter, "max inter-cluster cosine")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench->add_option("--label-noise", bench_args.label_noise)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench->add_option("--samplers", bench_args.samplers, "samplers to compare")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--k", bench_args.k)->check(CLI::Range(1, 1 << 20))->capture_default_str();
  bench->add_option("--tau", bench_args.tau)->check(CLI::NonNegativeNumber)->capture_default_str();
  bench->add_option("--threshold", bench_args.threshold)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench->add_option("--batch-size", bench_args.batch_size)
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  bench->add_option("--seeds", bench_args.n_seeds, "number of benchmark seeds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--lr", bench_args.lr)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--epochs", bench_args.epochs)
      ->check(CLI::Range(1, 1 << 24))
      ->capture_default_str();
  bench->add_option("--l2", bench_args.l2)->check(CLI::NonNegativeNumber)->capture_default_str();
  bench->add_option("--out", bench_args.out, "report JSON path (stdout if omitted)");
  bench->add_option("--csv", bench_args.csv, "per-candidate CSV for the first seed");
  bench->add_option("--dump-theta", bench_args.dump_theta,
                    "per-candidate theta JSONL for the first seed");
  add_seed_option(bench, bench_args.seed);
  bench->callback([&]() { rc = cmd_bench(bench_args); });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config_args(args);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
